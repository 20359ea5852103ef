#pragma once

#include "ddkit/bench.hpp"
#include "ddkit/cdd.hpp"
#include "ddkit/core.hpp"
#include "ddkit/ddmin.hpp"
#include "ddkit/external_oracle.hpp"
#include "ddkit/fixpoint.hpp"
#include "ddkit/oracle.hpp"
#include "ddkit/probdd.hpp"
#include "ddkit/session.hpp"
#include "ddkit/stats.hpp"
#include "ddkit/synthetic.hpp"
#include "ddkit/telemetry.hpp"
#include "ddkit/theory.hpp"
