#pragma once

// Command-line front end. run_cli is the whole program; main() only
// forwards to it, so tests drive it in-process.
//
// Exit status: 0 success, 1 property failure, 2 usage, 3 I/O.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bargmann/bargmann.hpp"
#include "report_io.hpp"
#include "verify_suites.hpp"

namespace bargmann::cli {

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kUsage = 2, kIo = 3 };

/// Invalid flag values detected after parsing; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 42;
  long long budget = 100'000;
  std::string out;
  std::string format = "csv";
};

inline Format parse_format(const std::string& f) {
  if (f == "csv") return Format::Csv;
  if (f == "json") return Format::Json;
  throw UsageError("--format must be csv or json");
}

inline std::vector<double> linear_grid(double lo, double hi, int steps) {
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  g.back() = hi;
  return g;
}

inline std::string matrix_text(const ComplexSymMatrix& m) { return m.to_string(); }

// ---------------------------------------------------------------------------

struct NormArgs {
  double p = 2.0;
  int n = 1;
  double alpha = 1.0;
};

inline int cmd_norm(const NormArgs& a, CommonOptions& c, std::ostream& out) {
  if (!(a.p >= 1.0) || !std::isfinite(a.p)) throw UsageError("--p must be at least 1");
  if (a.n < 1) throw UsageError("--n must be at least 1");
  if (!(a.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (c.budget < 0) throw UsageError("--budget must be nonnegative");
  const Format fmt_kind = parse_format(c.format);
  RunManifest m;
  m.command = "norm";
  m.seed = c.seed;
  m.started_at = utc_now();
  m.param("p", a.p);
  m.param("n", a.n);
  m.param("alpha", a.alpha);
  m.param("budget", c.budget);
  m.param("format", c.format);
  m.run_id = compute_run_id(m);

  const OperatorConfig cfg = OperatorConfig::make(a.n, a.alpha, a.p);
  const long long budget = (a.p == 1.0 || a.p == 2.0) ? 0 : c.budget;
  const NormReport rep = compute_norm(cfg, c.seed, budget);

  out << "p: " << fmt(a.p) << "\n";
  out << "p_conjugate: " << fmt(cfg.p_conjugate) << "\n";
  out << "n: " << a.n << "\n";
  out << "alpha: " << fmt(a.alpha) << "\n";
  out << "closed_form_norm: " << fmt(rep.closed_form_norm) << "\n";
  out << "optimized_norm: " << fmt(rep.optimized_norm) << "\n";
  out << "method: " << rep.method << "\n";
  out << "gradient_residual: " << fmt(rep.gradient_residual) << "\n";
  out << "samples_checked: " << rep.samples_checked << "\n";
  out << "max_sample_value: " << fmt(rep.max_sample_value) << "\n";
  out << "maximizer_A_prime: " << matrix_text(rep.maximizer.matrix()) << "\n";
  out << "run_id: " << m.run_id << "\n";

  if (!c.out.empty()) {
    Table t;
    t.columns = {"p", "p_conjugate", "n", "alpha", "closed_form_norm", "optimized_norm", "gradient_residual",
                 "samples_checked", "max_sample_value"};
    t.rows.push_back({a.p, cfg.p_conjugate, static_cast<double>(a.n), a.alpha, rep.closed_form_norm,
                      rep.optimized_norm, rep.gradient_residual, static_cast<double>(rep.samples_checked),
                      rep.max_sample_value});
    emit_table(t, m, fmt_kind, c.out, out);
  }
  const bool consistent = rep.optimized_norm <= rep.closed_form_norm * (1.0 + 1e-9);
  return consistent ? kOk : kPropertyFailure;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  double p_min = 1.1;
  double p_max = 10.0;
  int steps = 20;
  int n = 1;
};

inline Table sweep_table(const SweepArgs& a, std::uint64_t seed) {
  Table t;
  t.columns = {"p", "p_conjugate", "j_p", "sharp_norm", "critical_a", "optimizer_norm", "abs_rel_gap"};
  const auto grid = linear_grid(a.p_min, a.p_max, a.steps);
  t.rows = detail::parallel_map<std::vector<double>>(grid.size(), [&](std::size_t i) {
    const double p = grid[i];
    const double sharp = sharp_norm(p, a.n);
    const double opt = tensorized_norm(p, a.n, detail::derive_seed(seed, i));
    return std::vector<double>{p,
                               OperatorConfig::conjugate_exponent(p),
                               j_function(p),
                               sharp,
                               1.0 / (p - 1.0),
                               opt,
                               std::abs(opt - sharp) / sharp};
  });
  return t;
}

inline int cmd_sweep(const SweepArgs& a, CommonOptions& c, std::ostream& out) {
  if (!(a.p_min > 1.0) || !(a.p_max > a.p_min) || !std::isfinite(a.p_max))
    throw UsageError("need 1 < --p-min < --p-max");
  if (a.steps < 2) throw UsageError("--steps must be at least 2");
  if (a.n < 1) throw UsageError("--n must be at least 1");
  const Format fmt_kind = parse_format(c.format);
  RunManifest m;
  m.command = "sweep";
  m.seed = c.seed;
  m.started_at = utc_now();
  m.param("p_min", a.p_min);
  m.param("p_max", a.p_max);
  m.param("steps", a.steps);
  m.param("n", a.n);
  m.param("format", c.format);
  m.run_id = compute_run_id(m);
  const Table t = sweep_table(a, c.seed);
  emit_table(t, m, fmt_kind, c.out, out);
  return kOk;
}

// ---------------------------------------------------------------------------

inline int cmd_verify(const std::string& suite, CommonOptions& c, std::ostream& out) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw UsageError("--suite must be one of quadrature, hp, optimizer, duality, all");
  if (c.budget < 0) throw UsageError("--budget must be nonnegative");
  const auto results = run_suite(suite, {c.seed, c.budget});
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << fmt(r.residual) << " tol=" << fmt(r.tol)
        << "\n";
    if (!r.passed) {
      out << "  case: " << r.failing_case << "\n";
      all = false;
    }
  }
  out << (all ? "all properties passed" : "property failures present") << " (suite=" << suite
      << ", seed=" << c.seed << ", budget=" << c.budget << ")\n";
  return all ? kOk : kPropertyFailure;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string kind = "norm-vs-p";
  double p = 3.0;
  int n = 1;
  double alpha = 1.0;
  double p_min = 1.1;
  double p_max = 10.0;
  int steps = 0;  // 0 selects the per-kind default
  double c_max = 5.0;
  std::string axes = "a,d";
  double lo = 0.05;
  double hi = 2.05;
  std::string fixed;
};

inline int coord_index(const std::string& name) {
  static const std::vector<std::string> names = {"a", "d", "b", "e", "g", "f"};
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("unknown coordinate: " + name);
  return static_cast<int>(it - names.begin());
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline Table plot_table(const PlotArgs& a) {
  Table t;
  if (a.kind == "norm-vs-p") {
    if (!(a.p_min >= 1.0) || !(a.p_max > a.p_min)) throw UsageError("need 1 <= --p-min < --p-max");
    const int steps = a.steps ? a.steps : 100;
    if (steps < 2) throw UsageError("--steps must be at least 2");
    t.columns = {"p", "j_p", "sharp_norm"};
    // the minimum sits at p = 2; keep it on the grid when it is in range
    auto grid = linear_grid(a.p_min, a.p_max, steps);
    if (a.p_min < 2.0 && 2.0 < a.p_max && std::find(grid.begin(), grid.end(), 2.0) == grid.end()) {
      grid.push_back(2.0);
      std::sort(grid.begin(), grid.end());
    }
    for (double p : grid)
      t.rows.push_back({p, p > 1.0 ? j_function(p) : 1.0, sharp_norm(p, a.n)});
  } else if (a.kind == "ratio-vs-c") {
    if (!(a.p >= 1.0)) throw UsageError("--p must be at least 1");
    if (!(a.c_max > 0.0)) throw UsageError("--c-max must be positive");
    const int steps = a.steps ? a.steps : 100;
    if (steps < 1) throw UsageError("--steps must be positive");
    const OperatorConfig cfg = OperatorConfig::make(a.n, a.alpha, a.p);
    t.columns = {"c", "ratio", "ratio_pow_p"};
    for (int i = 1; i <= steps; ++i) {
      const double c = a.c_max * i / steps;
      const double r = ratio_vs_c(c, cfg);
      t.rows.push_back({c, r, std::pow(r, a.p)});
    }
  } else if (a.kind == "hp-slice") {
    if (!(a.p > 1.0)) throw UsageError("--p must exceed 1 for hp-slice");
    const auto ax = split(a.axes, ',');
    if (ax.size() != 2 || ax[0] == ax[1]) throw UsageError("--axes needs two distinct coordinates, e.g. a,d");
    const int steps = a.steps ? a.steps : 41;
    if (steps < 2) throw UsageError("--steps must be at least 2");
    if (!(a.hi > a.lo)) throw UsageError("need --lo < --hi");
    HpVector base = critical_coords(a.p).as_array();
    for (const auto& kv : split(a.fixed, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--fixed entries look like b=0");
      try {
        base[static_cast<std::size_t>(coord_index(kv.substr(0, eq)))] = std::stod(kv.substr(eq + 1));
      } catch (const std::invalid_argument&) {
        throw UsageError("--fixed value is not a number: " + kv);
      }
    }
    const int i0 = coord_index(ax[0]), i1 = coord_index(ax[1]);
    t.columns = {ax[0], ax[1], "h_p"};
    const auto grid = linear_grid(a.lo, a.hi, steps);
    for (double x : grid)
      for (double y : grid) {
        HpVector v = base;
        v[static_cast<std::size_t>(i0)] = x;
        v[static_cast<std::size_t>(i1)] = y;
        double h = std::nan("");
        try {
          h = hp_coords(HpCoords::from_array(v), a.p).value;
        } catch (const DomainError&) {
        }
        t.rows.push_back({x, y, h});
      }
  } else {
    throw UsageError("--kind must be norm-vs-p, hp-slice or ratio-vs-c");
  }
  return t;
}

inline int cmd_plotdata(const PlotArgs& a, CommonOptions& c, std::ostream& out) {
  const Format fmt_kind = parse_format(c.format);
  RunManifest m;
  m.command = "plotdata";
  m.seed = c.seed;
  m.started_at = utc_now();
  m.param("kind", a.kind);
  m.param("p", a.p);
  m.param("n", a.n);
  m.param("alpha", a.alpha);
  m.param("p_min", a.p_min);
  m.param("p_max", a.p_max);
  m.param("steps", a.steps);
  m.param("c_max", a.c_max);
  m.param("axes", a.axes);
  m.param("lo", a.lo);
  m.param("hi", a.hi);
  m.param("fixed", a.fixed);
  m.param("format", c.format);
  m.run_id = compute_run_id(m);
  const Table t = plot_table(a);
  emit_table(t, m, fmt_kind, c.out, out);
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sharp L^p norms of the Bargmann projection: compute, sweep, verify, tabulate."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--budget", common.budget, "sample budget")->capture_default_str();
    if (with_out) {
      sub->add_option("--out", common.out, "output file (stdout when omitted)");
      sub->add_option("--format", common.format, "csv or json")->capture_default_str();
    }
  };

  NormArgs na;
  auto* norm = app.add_subcommand("norm", "closed-form and optimizer-confirmed norm");
  norm->add_option("--p", na.p, "exponent p >= 1")->required();
  norm->add_option("--n", na.n, "complex dimension")->capture_default_str();
  norm->add_option("--alpha", na.alpha, "Gaussian scale")->capture_default_str();
  add_common(norm, true);

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "tabulate the norm over a p grid");
  sweep->add_option("--p-min", sa.p_min)->capture_default_str();
  sweep->add_option("--p-max", sa.p_max)->capture_default_str();
  sweep->add_option("--steps", sa.steps)->capture_default_str();
  sweep->add_option("--n", sa.n)->capture_default_str();
  add_common(sweep, true);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run property suites");
  verify->add_option("--suite", suite, "quadrature|hp|optimizer|duality|all")->capture_default_str();
  add_common(verify, false);

  PlotArgs pa;
  auto* plot = app.add_subcommand("plotdata", "emit plottable tables");
  plot->add_option("--kind", pa.kind, "norm-vs-p|hp-slice|ratio-vs-c")->capture_default_str();
  plot->add_option("--p", pa.p)->capture_default_str();
  plot->add_option("--n", pa.n)->capture_default_str();
  plot->add_option("--alpha", pa.alpha)->capture_default_str();
  plot->add_option("--p-min", pa.p_min)->capture_default_str();
  plot->add_option("--p-max", pa.p_max)->capture_default_str();
  plot->add_option("--steps", pa.steps, "grid size (per-kind default when 0)")->capture_default_str();
  plot->add_option("--c-max", pa.c_max)->capture_default_str();
  plot->add_option("--axes", pa.axes, "two hp coordinates to grid")->capture_default_str();
  plot->add_option("--lo", pa.lo)->capture_default_str();
  plot->add_option("--hi", pa.hi)->capture_default_str();
  plot->add_option("--fixed", pa.fixed, "overrides for the other coordinates, e.g. b=0,f=0.5");
  add_common(plot, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*norm) return cmd_norm(na, common, out);
    if (*sweep) return cmd_sweep(sa, common, out);
    if (*verify) return cmd_verify(suite, common, out);
    if (*plot) return cmd_plotdata(pa, common, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const CounterexampleError& e) {
    err << "property failure: " << e.what() << "\n  case: " << e.witness() << "\n";
    return kPropertyFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPropertyFailure;
  }
  return kUsage;
}

}  // namespace bargmann::cli
