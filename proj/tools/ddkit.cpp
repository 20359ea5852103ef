// ddkit command-line front end.
//
//   ddkit reduce --input FILE --oracle CMD [--alg cdd] ...
//   ddkit check-minimal --input FILE --oracle CMD
//   ddkit verify-theory --p0 0.1 [--sweep]
//   ddkit bench --manifest FILE --out DIR
//   ddkit gen planted|table ...
//
// Exit codes: 0 success, 1 invalid arguments, 2 the oracle rejects the
// original input, 3 the oracle command is unavailable, 4 (check-minimal) the
// input is not 1-minimal (verify-theory: a bound check failed).

#include "ddkit/ddkit.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ddkit;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_precondition = 2;
constexpr int exit_oracle = 3;
constexpr int exit_not_minimal = 4;
constexpr int exit_check_failed = 4;

constexpr int report_schema_version = 1;

class usage_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw usage_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view bytes)
{
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
}

void require_p0(double p0)
{
  if (!(p0 > 0.0 && p0 < 1.0)) {
    std::ostringstream msg;
    msg << "--p0 must lie in the open interval (0, 1), got " << p0;
    throw usage_error(msg.str());
  }
}

struct OracleOptions
{
  std::string input;
  std::string oracle;
  std::string granularity = "line";
  double timeout = 300.0;
  bool no_cache = false;
  std::string keep_logs;
  std::string candidate_name;

  void add_to(CLI::App* cmd)
  {
    cmd->add_option("--input", input, "File to reduce")->required();
    cmd->add_option("--oracle", oracle,
                    "Interestingness command; the candidate path is appended and exported as "
                    "DD_CANDIDATE. Exit status 0 means the property holds")
        ->required();
    cmd->add_option("--granularity", granularity, "line, word or char")->capture_default_str();
    cmd->add_option("--timeout", timeout, "Seconds per oracle run; a timeout counts as failing")
        ->capture_default_str();
    cmd->add_flag("--no-cache", no_cache, "Do not memoize verdicts by content");
    cmd->add_option("--keep-logs", keep_logs, "Directory for per-query stdout/stderr logs");
    cmd->add_option("--candidate-name", candidate_name,
                    "File name of each candidate (default: the input's file name)");
  }

  Granularity parsed_granularity() const
  {
    try {
      return parse_granularity(granularity);
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
  }

  std::shared_ptr<ExternalOracle> make_oracle() const
  {
    if (!(timeout > 0))
      throw usage_error("--timeout must be positive");
    ExternalOracleConfig cfg;
    cfg.command = split_command(oracle);
    if (cfg.command.empty())
      throw usage_error("--oracle is empty");
    cfg.candidate_filename =
        candidate_name.empty() ? fs::path(input).filename().string() : candidate_name;
    cfg.timeout_s = timeout;
    if (!keep_logs.empty())
      cfg.log_dir = keep_logs;
    return std::make_shared<ExternalOracle>(std::move(cfg));
  }
};

struct ReduceOptions
{
  OracleOptions io;
  std::string alg = "cdd";
  double p0 = 0.1;
  std::uint64_t seed = 0;
  bool fixpoint = false;
  int max_iterations = 10;
  std::size_t max_queries = 0;
  std::string telemetry;
  std::string report;
  std::string output;
  std::string tie = "strict";
  bool check_minimal = false;
};

int cmd_reduce(const ReduceOptions& o)
{
  require_p0(o.p0);
  Algorithm alg;
  TieRule tie;
  try {
    alg = parse_algorithm(o.alg);
    tie = parse_tie_rule(o.tie);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  if (o.max_iterations < 1)
    throw usage_error("--max-iterations must be at least 1");
  const auto granularity = o.io.parsed_granularity();
  const auto bytes = read_file(o.io.input);
  const auto input = segment(bytes, granularity);

  auto external = o.io.make_oracle();
  SessionOptions sopts;
  sopts.use_cache = !o.io.no_cache;
  if (o.max_queries > 0)
    sopts.max_queries = o.max_queries;
  Session session(as_property(external), sopts);
  const ReduceParams params{o.p0, o.seed, tie};

  auto outcome = o.fixpoint ? fixpoint_reduce(alg, input, session, params, o.max_iterations)
                            : run_algorithm(alg, input, session, params);

  const auto reduced = reassemble(outcome.final);
  const fs::path out_path = o.output.empty() ? fs::path(o.io.input + ".reduced") : fs::path(o.output);
  write_file(out_path, reduced);

  nlohmann::json report = {
      {"schema_version", report_schema_version},
      {"algorithm", to_string(alg)},
      {"input", o.io.input},
      {"output", out_path.string()},
      {"granularity", to_string(granularity)},
      {"p0", o.p0},
      {"seed", o.seed},
      {"probdd_tie", o.tie},
      {"initial_elements", input.size()},
      {"initial_bytes", input.byte_size()},
      {"final_elements", outcome.final.size()},
      {"final_bytes", outcome.final.byte_size()},
      {"queries", outcome.queries},
      {"process_spawns", external->spawns()},
      {"cache_hits", outcome.cache_hits},
      {"timeouts", outcome.timeouts},
      {"wall_time_s", outcome.wall_time_s},
      {"rounds", outcome.rounds},
      {"iteration_sizes", outcome.iteration_sizes},
      {"budget_exhausted", outcome.budget_exhausted}};
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& r : outcome.round_log)
    sizes.push_back(r.subset_size);
  report["round_sizes"] = std::move(sizes);
  report["stats"] = to_json(session.telemetry().stats());

  if (o.check_minimal) {
    auto check = check_one_minimal(outcome.final, session.oracle(), session.cache());
    report["one_minimal"] = check.is_one_minimal;
    nlohmann::json removable = nlohmann::json::array();
    for (auto id : check.removable_ids)
      removable.push_back(to_index(id));
    report["removable_ids"] = std::move(removable);
  }

  if (!o.telemetry.empty())
    write_file(o.telemetry, session.telemetry().to_json(to_string(alg), o.io.input).dump(2) + "\n");
  const auto text = report.dump(2) + "\n";
  if (!o.report.empty())
    write_file(o.report, text);
  std::cout << text;
  return exit_ok;
}

int cmd_check_minimal(const OracleOptions& o)
{
  const auto input = segment(read_file(o.input), o.parsed_granularity());
  auto external = o.make_oracle();
  QueryCache cache;
  auto report = check_one_minimal(input, as_property(external), o.no_cache ? nullptr : &cache);
  std::cout << "elements: " << input.size() << "\n";
  for (auto id : report.removable_ids) {
    auto payload = input.only({id})[0].payload;
    while (!payload.empty() && (payload.back() == '\n' || payload.back() == '\r'))
      payload.pop_back();
    std::cout << "removable " << to_index(id) << ": " << payload << "\n";
  }
  std::cout << (report.is_one_minimal ? "1-minimal\n" : "not 1-minimal\n");
  return report.is_one_minimal ? exit_ok : exit_not_minimal;
}

struct TheoryOptions
{
  double p0 = 0.1;
  bool sweep = false;
  std::int64_t max_size = 100000;
  std::string csv;
};

int cmd_verify_theory(const TheoryOptions& o)
{
  require_p0(o.p0);
  std::ostringstream out;
  out << std::setprecision(12);
  bool all_hold = true;
  if (o.sweep) {
    if (o.max_size < 2)
      throw usage_error("--max-size must be at least 2");
    out << "s,lower,s_next,upper,holds\n";
    for (std::int64_t s = 2; s <= o.max_size; ++s) {
      auto b = theory::bound_check(s);
      all_hold = all_hold && b.holds;
      out << s << ',' << b.lower << ',' << b.value << ',' << b.upper << ',' << (b.holds ? 1 : 0)
          << '\n';
    }
  } else {
    out << "r,p_r,size,s_real,s_next_real,lower,upper,holds\n";
    for (int r = 0;; ++r) {
      const double p = theory::prob_at_round(r, o.p0);
      const auto size = compute_size(r, o.p0);
      out << r << ',' << p << ',' << size << ',';
      if (p < 1.0) {
        const double s = theory::size_from_prob(p);
        out << s << ',';
        if (s > 1.0) {
          const double next = theory::size_recursion(s);
          const double lower = theory::decay * s - 1.0;
          const double upper = theory::decay * s;
          const bool ok = lower - 1e-9 <= next && next <= upper + 1e-9;
          all_hold = all_hold && ok;
          out << next << ',' << lower << ',' << upper << ',' << (ok ? 1 : 0) << '\n';
        } else {
          out << ",,,\n";
        }
      } else {
        out << ",,,,\n";
      }
      if (size == 1)
        break;
    }
  }
  if (o.csv.empty())
    std::cout << out.str();
  else
    write_file(o.csv, out.str());
  return all_hold ? exit_ok : exit_check_failed;
}

struct BenchOptions
{
  std::string manifest;
  std::string out = "bench-out";
};

int cmd_bench(const BenchOptions& o)
{
  Manifest m;
  try {
    m = load_manifest(o.manifest);
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("bad manifest: ") + e.what());
  }
  auto result = run_matrix(m);
  write_matrix(result, o.out);
  result.write_results_csv(std::cout);
  std::cout << '\n';
  result.write_pvalues_csv(std::cout);
  return exit_ok;
}

struct GenOptions
{
  std::size_t n = 8;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::string kernel;
  std::string sets;
  std::string out = ".";
};

std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

void write_script(const fs::path& path, const std::string& body)
{
  write_file(path, body);
  fs::permissions(path, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                  fs::perm_options::add);
}

int cmd_gen_planted(const GenOptions& o)
{
  auto c = [&] {
    if (o.kernel.empty())
      return gen_planted(o.n, o.k, o.seed);
    PlantedCase pc = gen_planted(o.n, 1, o.seed);
    pc.kernel.clear();
    for (const auto& part : split(o.kernel, ',')) {
      const auto v = std::stoul(part);
      if (v < 1 || v > o.n)
        throw usage_error("--kernel ids must lie in [1, n]");
      pc.kernel.push_back(ElementId{static_cast<std::uint32_t>(v)});
    }
    std::sort(pc.kernel.begin(), pc.kernel.end());
    return pc;
  }();
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "input.txt", reassemble(c.list));
  std::string script = "#!/bin/sh\n# Holds iff every kernel line is present.\nfor t in";
  for (auto id : c.kernel)
    script += " e" + std::to_string(to_index(id));
  script += "; do\n  grep -qx \"$t\" \"$1\" || exit 1\ndone\nexit 0\n";
  write_script(fs::path(o.out) / "oracle.sh", script);
  std::cout << "kernel:";
  for (auto id : c.kernel)
    std::cout << ' ' << to_index(id);
  std::cout << '\n';
  return exit_ok;
}

int cmd_gen_table(const GenOptions& o)
{
  TruthTable t = [&] {
    if (o.sets.empty())
      return gen_truth_table(o.n, o.seed);
    if (o.n < 1 || o.n > max_table_elements)
      throw usage_error("--n must lie in [1, 8]");
    std::vector<std::string> payloads;
    for (std::size_t i = 0; i < o.n; ++i)
      payloads.push_back(std::string(1, static_cast<char>('a' + i)) + "\n");
    auto list = make_list(payloads);
    std::vector<IdSet> holding;
    for (const auto& set : split(o.sets, ';')) {
      IdSet ids;
      for (const auto& name : split(set, ',')) {
        if (name.size() != 1 || name[0] < 'a' || static_cast<std::size_t>(name[0] - 'a') >= o.n)
          throw usage_error("--sets uses element names a.. up to n");
        ids.push_back(ElementId{static_cast<std::uint32_t>(name[0] - 'a' + 1)});
      }
      holding.push_back(std::move(ids));
    }
    try {
      return make_truth_table(std::move(list), std::move(holding));
    } catch (const precondition_error& e) {
      throw usage_error(e.what());
    }
  }();
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "input.txt", reassemble(t.list));
  auto name_of = [&](const IdSet& ids) {
    std::string s;
    for (auto id : ids)
      s += static_cast<char>('a' + to_index(id) - 1);
    return s;
  };
  std::string script =
      "#!/bin/sh\n# Holds iff the set of present lines is one of the table's holding sets.\n"
      "present=$(grep -x '[a-h]' \"$1\" | sort -u | tr -d '\\n')\ncase \"$present\" in\n";
  for (std::size_t i = 0; i < t.holding.size(); ++i)
    script += "  " + name_of(t.holding[i]) + ") exit 0 ;;\n";
  script += "esac\nexit 1\n";
  write_script(fs::path(o.out) / "oracle.sh", script);
  std::cout << "holding sets: " << t.holding.size() << "\n1-minimal holding sets:";
  for (const auto& s : t.one_minimal)
    std::cout << ' ' << name_of(s);
  std::cout << '\n';
  return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"ddkit: test-input minimization with ddmin, ProbDD and CDD"};
  app.require_subcommand(1);
  std::function<int()> action;

  ReduceOptions reduce;
  auto* r = app.add_subcommand("reduce", "Reduce an input while the oracle keeps holding");
  reduce.io.add_to(r);
  r->add_option("--alg", reduce.alg, "ddmin, probdd, probdd-norandom or cdd")->capture_default_str();
  r->add_option("--p0", reduce.p0, "Initial probability for ProbDD/CDD")->capture_default_str();
  r->add_option("--seed", reduce.seed, "Seed for ProbDD's tie shuffling")->capture_default_str();
  r->add_flag("--fixpoint", reduce.fixpoint, "Rerun on the result until it stops shrinking");
  r->add_option("--max-iterations", reduce.max_iterations, "Fixpoint pass limit")
      ->capture_default_str();
  r->add_option("--max-queries", reduce.max_queries, "Stop after this many queries (0 = no limit)");
  r->add_option("--telemetry", reduce.telemetry, "Write per-query telemetry JSON here");
  r->add_option("--report", reduce.report, "Write the summary JSON here");
  r->add_option("--output", reduce.output, "Reduced output path (default: <input>.reduced)");
  r->add_option("--probdd-tie", reduce.tie, "strict or larger")->capture_default_str();
  r->add_flag("--check-minimal", reduce.check_minimal, "Check the result for 1-minimality");
  r->callback([&] { action = [&] { return cmd_reduce(reduce); }; });

  OracleOptions check;
  auto* c = app.add_subcommand("check-minimal", "Report single elements whose deletion keeps the property");
  check.add_to(c);
  c->callback([&] { action = [&] { return cmd_check_minimal(check); }; });

  TheoryOptions theory_opts;
  auto* t = app.add_subcommand("verify-theory", "Print the size schedule and check the linear size bounds");
  t->add_option("--p0", theory_opts.p0, "Initial probability")->capture_default_str();
  t->add_flag("--sweep", theory_opts.sweep, "Check the bounds for every integer size in [2, max-size]");
  t->add_option("--max-size", theory_opts.max_size, "Upper end of --sweep")->capture_default_str();
  t->add_option("--csv", theory_opts.csv, "Write the table here instead of stdout");
  t->callback([&] { action = [&] { return cmd_verify_theory(theory_opts); }; });

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Run a benchmark manifest");
  b->add_option("--manifest", bench.manifest, "Manifest JSON")->required();
  b->add_option("--out", bench.out, "Output directory")->capture_default_str();
  b->callback([&] { action = [&] { return cmd_bench(bench); }; });

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic input file and oracle script");
  g->require_subcommand(1);
  auto* gp = g->add_subcommand("planted", "Lines e1..en; the oracle needs every kernel line");
  gp->add_option("--n", gen.n, "Number of lines")->capture_default_str();
  gp->add_option("--k", gen.k, "Kernel size")->capture_default_str();
  gp->add_option("--seed", gen.seed, "Kernel sampling seed")->capture_default_str();
  gp->add_option("--kernel", gen.kernel, "Explicit kernel ids, e.g. 1,2,3,4,6,7,8");
  gp->add_option("--out", gen.out, "Output directory")->capture_default_str();
  gp->callback([&] { action = [&] { return cmd_gen_planted(gen); }; });
  auto* gt = g->add_subcommand("table", "Lines a..; the oracle is an explicit truth table");
  gt->add_option("--n", gen.n, "Number of lines (<= 8)")->capture_default_str();
  gt->add_option("--seed", gen.seed, "Table seed")->capture_default_str();
  gt->add_option("--sets", gen.sets, "Explicit holding sets, e.g. \"a,b,c;a,c;c\"");
  gt->add_option("--out", gen.out, "Output directory")->capture_default_str();
  gt->callback([&] { action = [&] { return cmd_gen_table(gen); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_usage;
  }

  try {
    return action();
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_precondition;
  } catch (const oracle_unavailable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_oracle;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
}
