#pragma once

// Benchmark matrix: algorithm x benchmark x repetition, aggregated with
// geometric means and compared pairwise with the Wilcoxon signed-rank test.
//
// Manifest (JSON):
//   {
//     "benchmarks": [
//       {"name": "...", "input_path": "...", "oracle_cmd": "sh check.sh",
//        "granularity": "line", "p0": 0.1, "timeout": 300},
//       {"name": "...", "planted": {"n": 256, "k": 16, "seed": 1}, "p0": 0.1}
//     ],
//     "algorithms": ["ddmin", "cdd"],
//     "repetitions": 5, "base_seed": 0, "parallelism": 4
//   }

#include "ddkit/external_oracle.hpp"
#include "ddkit/fixpoint.hpp"
#include "ddkit/stats.hpp"
#include "ddkit/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <thread>

namespace ddkit {

struct PlantedSpec
{
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

struct BenchmarkSpec
{
  std::string name;
  std::filesystem::path input_path;
  std::vector<std::string> oracle_cmd;
  Granularity granularity = Granularity::line;
  double timeout_s = 300.0;
  std::optional<PlantedSpec> planted;
  double p0 = 0.1;
};

struct Manifest
{
  std::vector<BenchmarkSpec> benchmarks;
  std::vector<Algorithm> algorithms;
  int repetitions = 1;
  std::uint64_t base_seed = 0;
  int parallelism = 1;
  TieRule tie = TieRule::strict;
  bool use_cache = true;
};

/// Relative input paths are resolved against `base_dir`.
inline Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir = {})
{
  Manifest m;
  for (const auto& b : j.at("benchmarks")) {
    BenchmarkSpec spec;
    spec.name = b.at("name").get<std::string>();
    spec.p0 = b.value("p0", 0.1);
    if (!(spec.p0 > 0.0 && spec.p0 < 1.0))
      throw std::invalid_argument("benchmark " + spec.name + ": p0 must lie in (0, 1)");
    if (b.contains("planted")) {
      const auto& p = b.at("planted");
      spec.planted = PlantedSpec{p.at("n").get<std::size_t>(), p.at("k").get<std::size_t>(),
                                 p.value("seed", std::uint64_t{0})};
    } else {
      spec.input_path = b.at("input_path").get<std::string>();
      if (spec.input_path.is_relative() && !base_dir.empty())
        spec.input_path = base_dir / spec.input_path;
      const auto& cmd = b.at("oracle_cmd");
      spec.oracle_cmd = cmd.is_array() ? cmd.get<std::vector<std::string>>()
                                       : split_command(cmd.get<std::string>());
      spec.granularity = parse_granularity(b.value("granularity", std::string("line")));
      spec.timeout_s = b.value("timeout", 300.0);
    }
    m.benchmarks.push_back(std::move(spec));
  }
  for (const auto& a : j.at("algorithms"))
    m.algorithms.push_back(parse_algorithm(a.get<std::string>()));
  m.repetitions = j.value("repetitions", 1);
  m.base_seed = j.value("base_seed", std::uint64_t{0});
  m.parallelism = j.value("parallelism", 1);
  m.tie = parse_tie_rule(j.value("probdd_tie", std::string("strict")));
  m.use_cache = j.value("cache", true);
  if (m.repetitions < 1 || m.parallelism < 1)
    throw std::invalid_argument("repetitions and parallelism must be at least 1");
  if (m.benchmarks.empty() || m.algorithms.empty())
    throw std::invalid_argument("manifest needs at least one benchmark and one algorithm");
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot read manifest " + path.string());
  return parse_manifest(nlohmann::json::parse(in), path.parent_path());
}

struct RunRecord
{
  std::string benchmark;
  Algorithm algorithm = Algorithm::cdd;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t final_size = 0;
  std::size_t final_bytes = 0;
  std::size_t queries = 0;
  std::size_t oracle_calls = 0;
  double time_s = 0.0;
  nlohmann::json telemetry;
};

struct ResultRow
{
  std::string benchmark;
  Algorithm algorithm = Algorithm::cdd;
  bool ok = false;
  std::string error;
  double final_size_gm = 0.0;
  double time_gm = 0.0;
  double queries_gm = 0.0;
};

struct PValueRow
{
  std::string metric;
  Algorithm first = Algorithm::cdd;
  Algorithm second = Algorithm::cdd;
  std::size_t pairs = 0;
  std::optional<stats::WilcoxonResult> test;
  std::string error;
};

struct MatrixResult
{
  std::vector<RunRecord> runs;
  std::vector<ResultRow> rows;
  std::vector<PValueRow> pvalues;

  const ResultRow* row(std::string_view benchmark, Algorithm a) const
  {
    for (const auto& r : rows)
      if (r.benchmark == benchmark && r.algorithm == a)
        return &r;
    return nullptr;
  }

  const PValueRow* pvalue(std::string_view metric, Algorithm a, Algorithm b) const
  {
    for (const auto& p : pvalues)
      if (p.metric == metric && p.first == a && p.second == b)
        return &p;
    return nullptr;
  }

  /// benchmark,algorithm,final_size_gm,time_gm,queries_gm,status
  void write_results_csv(std::ostream& out) const
  {
    out << "benchmark,algorithm,final_size_gm,time_gm,queries_gm,status\n";
    out << std::setprecision(10);
    for (const auto& r : rows) {
      out << r.benchmark << ',' << to_string(r.algorithm) << ',';
      if (r.ok)
        out << r.final_size_gm << ',' << r.time_gm << ',' << r.queries_gm << ",ok\n";
      else
        out << ",,,failed\n";
    }
  }

  /// metric,algorithm_a,algorithm_b,pairs,statistic,p_value
  void write_pvalues_csv(std::ostream& out) const
  {
    out << "metric,algorithm_a,algorithm_b,pairs,statistic,p_value\n";
    out << std::setprecision(10);
    for (const auto& p : pvalues) {
      out << p.metric << ',' << to_string(p.first) << ',' << to_string(p.second) << ',' << p.pairs
          << ',';
      if (p.test)
        out << p.test->statistic << ',' << p.test->p_value << '\n';
      else
        out << "NA,NA\n";
    }
  }
};

namespace detail {

struct BenchInput
{
  ElementList list;
  PropertyOracle oracle;
};

inline BenchInput load_bench_input(const BenchmarkSpec& spec)
{
  if (spec.planted) {
    auto c = gen_planted(spec.planted->n, spec.planted->k, spec.planted->seed);
    auto oracle = c.oracle();
    return {std::move(c.list), std::move(oracle)};
  }
  std::ifstream in(spec.input_path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot read " + spec.input_path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ExternalOracleConfig cfg;
  cfg.command = spec.oracle_cmd;
  cfg.candidate_filename = spec.input_path.filename().string();
  cfg.timeout_s = spec.timeout_s;
  return {segment(bytes, spec.granularity),
          as_property(std::make_shared<ExternalOracle>(std::move(cfg)))};
}

/// Geometric mean that treats a zero member as a zero mean.
inline double geometric_mean_or_zero(const std::vector<double>& xs)
{
  if (std::any_of(xs.begin(), xs.end(), [](double x) { return x <= 0.0; }))
    return 0.0;
  return stats::geometric_mean(xs);
}

inline std::string cell_name(const RunRecord& r)
{
  return r.benchmark + "__" + std::string(to_string(r.algorithm)) + "__" +
         std::to_string(r.repetition);
}

} // namespace detail

inline RunRecord run_cell(const Manifest& m, const BenchmarkSpec& spec, Algorithm alg, int rep)
{
  RunRecord rec;
  rec.benchmark = spec.name;
  rec.algorithm = alg;
  rec.repetition = rep;
  rec.seed = m.base_seed + static_cast<std::uint64_t>(rep);
  try {
    auto input = detail::load_bench_input(spec);
    Session session(input.oracle, SessionOptions{m.use_cache, std::nullopt});
    auto out = run_algorithm(alg, input.list, session, ReduceParams{spec.p0, rec.seed, m.tie});
    rec.ok = true;
    rec.final_size = out.final.size();
    rec.final_bytes = out.final.byte_size();
    rec.queries = out.queries;
    rec.oracle_calls = out.oracle_calls;
    rec.time_s = out.wall_time_s;
    rec.telemetry = session.telemetry().to_json(to_string(alg), spec.name);
  } catch (const precondition_error& e) {
    rec.error = e.what();
  } catch (const oracle_unavailable& e) {
    rec.error = e.what();
  } catch (const std::invalid_argument& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Runs every (benchmark, algorithm, repetition) cell, `parallelism` at a time.
/// Repetition i uses seed base_seed + i. Results are ordered by benchmark,
/// algorithm and repetition regardless of scheduling.
inline MatrixResult run_matrix(const Manifest& m)
{
  struct Cell
  {
    const BenchmarkSpec* spec;
    Algorithm alg;
    int rep;
  };
  std::vector<Cell> cells;
  for (const auto& b : m.benchmarks)
    for (auto a : m.algorithms)
      for (int rep = 0; rep < m.repetitions; ++rep)
        cells.push_back({&b, a, rep});

  MatrixResult result;
  result.runs.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();)
      result.runs[i] = run_cell(m, *cells[i].spec, cells[i].alg, cells[i].rep);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(m.parallelism), cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < cells.size(); i += static_cast<std::size_t>(m.repetitions)) {
    ResultRow row;
    row.benchmark = cells[i].spec->name;
    row.algorithm = cells[i].alg;
    row.ok = true;
    std::vector<double> sizes, times, queries;
    for (int rep = 0; rep < m.repetitions; ++rep) {
      const auto& run = result.runs[i + static_cast<std::size_t>(rep)];
      if (!run.ok) {
        row.ok = false;
        row.error = run.error;
        break;
      }
      sizes.push_back(static_cast<double>(run.final_size));
      times.push_back(std::max(run.time_s, 1e-9));
      queries.push_back(static_cast<double>(run.queries));
    }
    if (row.ok) {
      row.final_size_gm = detail::geometric_mean_or_zero(sizes);
      row.time_gm = detail::geometric_mean_or_zero(times);
      row.queries_gm = detail::geometric_mean_or_zero(queries);
    }
    result.rows.push_back(std::move(row));
  }

  const std::pair<const char*, double ResultRow::*> metrics[] = {
      {"final_size", &ResultRow::final_size_gm},
      {"time", &ResultRow::time_gm},
      {"queries", &ResultRow::queries_gm}};
  for (const auto& [metric, field] : metrics) {
    for (std::size_t a = 0; a < m.algorithms.size(); ++a) {
      for (std::size_t b = a + 1; b < m.algorithms.size(); ++b) {
        PValueRow pv;
        pv.metric = metric;
        pv.first = m.algorithms[a];
        pv.second = m.algorithms[b];
        std::vector<double> xs, ys;
        for (const auto& bench : m.benchmarks) {
          auto* ra = result.row(bench.name, pv.first);
          auto* rb = result.row(bench.name, pv.second);
          if (ra && rb && ra->ok && rb->ok) {
            xs.push_back(ra->*field);
            ys.push_back(rb->*field);
          }
        }
        pv.pairs = xs.size();
        try {
          pv.test = stats::wilcoxon_signed_rank(xs, ys);
        } catch (const std::invalid_argument& e) {
          pv.error = e.what();
        }
        result.pvalues.push_back(std::move(pv));
      }
    }
  }
  return result;
}

/// results.csv, pvalues.csv, results.json and telemetry/<cell>.json.
inline void write_matrix(const MatrixResult& r, const std::filesystem::path& dir)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir / "telemetry");
  {
    std::ofstream out(dir / "results.csv");
    r.write_results_csv(out);
  }
  {
    std::ofstream out(dir / "pvalues.csv");
    r.write_pvalues_csv(out);
  }
  nlohmann::json j;
  j["results"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json e = {{"benchmark", row.benchmark},
                        {"algorithm", to_string(row.algorithm)},
                        {"status", row.ok ? "ok" : "failed"}};
    if (row.ok) {
      e["final_size_gm"] = row.final_size_gm;
      e["time_gm"] = row.time_gm;
      e["queries_gm"] = row.queries_gm;
    } else {
      e["error"] = row.error;
    }
    j["results"].push_back(std::move(e));
  }
  j["pvalues"] = nlohmann::json::array();
  for (const auto& p : r.pvalues) {
    nlohmann::json e = {{"metric", p.metric},
                        {"algorithm_a", to_string(p.first)},
                        {"algorithm_b", to_string(p.second)},
                        {"pairs", p.pairs}};
    if (p.test) {
      e["statistic"] = p.test->statistic;
      e["p_value"] = p.test->p_value;
    } else {
      e["error"] = p.error;
    }
    j["pvalues"].push_back(std::move(e));
  }
  std::ofstream(dir / "results.json") << j.dump(2) << '\n';
  for (const auto& run : r.runs)
    if (run.ok)
      std::ofstream(dir / "telemetry" / (detail::cell_name(run) + ".json")) << run.telemetry.dump(2)
                                                                           << '\n';
}

} // namespace ddkit
