#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aes/certify_ct.hpp"
#include "aes/certify_dt.hpp"
#include "aes/fixtures.hpp"
#include "aes/io.hpp"
#include "aes/metzler.hpp"
#include "aes/simulate.hpp"

namespace {

using aes::io::json;
using aes::io::SystemKind;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Options {
  std::string input;
  std::string out;
  std::string cert;
  std::vector<double> xi;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> grid_t_max;
  std::optional<double> grid_step;
  double horizon = 0.0;
  double step = 1e-3;
  std::size_t runs = 20;
  std::size_t histories = 10;
  std::uint64_t seed = 0;
  double slack = aes::sim::kDefaultSlack;
  unsigned threads = 0;
  std::size_t nonlinearity = 0;
  std::size_t history = 0;
};

const char* kGridWarning = "grid evidence: the for-all-t hypothesis was sampled on a finite grid, not proven";

std::string fmt(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw aes::InputError("cannot write " + o.out);
  f << text;
}

json stamp(json report, const char* command) {
  report["version"] = aes::io::kToolVersion;
  report["command"] = command;
  return report;
}

std::optional<aes::Vector> supplied_xi(const Options& o, std::size_t n) {
  if (o.xi.empty()) return std::nullopt;
  if (o.xi.size() != n) throw aes::InputError("--xi needs " + std::to_string(n) + " components");
  for (double v : o.xi)
    if (!(v > 0.0) || !std::isfinite(v)) throw aes::InputError("--xi components must be positive");
  aes::Vector xi = o.xi;
  const double s = aes::norm1(xi);
  for (double& v : xi) v /= s;
  return xi;
}

std::vector<double> time_grid(const Options& o, const aes::ContinuousSystem& sys) {
  if (!o.grid_t_max && !o.grid_step) return aes::default_grid(sys.max_delay());
  const double h = sys.max_delay();
  const double t_max = o.grid_t_max.value_or(h > 0.0 ? 10.0 * h : 10.0);
  const double step = o.grid_step.value_or(h > 0.0 ? h / 100.0 : 0.01);
  return aes::make_grid(t_max, step);
}

std::vector<double> step_grid(const Options& o, const aes::DiscreteSystem& sys) {
  if (!o.grid_t_max) return aes::default_step_grid(sys.max_delay());
  const double k = *o.grid_t_max;
  if (!(k >= 0.0) || k != std::floor(k)) throw aes::InputError("--grid-t-max must be a nonnegative integer");
  return aes::step_grid(static_cast<int>(k));
}

std::vector<aes::ct::DelayBound> constant_delays(const aes::ContinuousSystem& sys) {
  std::vector<aes::ct::DelayBound> out;
  for (const auto& d : sys.delays()) out.push_back({d.h, d.b.constant()});
  return out;
}

// --- certify ----------------------------------------------------------------

struct Outcome {
  json report;
  bool certified;
  std::string summary;
};

Outcome finish(json report, const char* command) {
  const bool ok = report.value("status", "") == "certified";
  std::string summary;
  if (ok) {
    const bool ct = report["kind"] == "continuous";
    summary = std::string("certified: ") + (ct ? "alpha = " : "lambda = ") +
              fmt(report[ct ? "alpha" : "lambda"].get<double>()) + " (" +
              report["criterion"].get<std::string>() + ", " + report["evidence"].get<std::string>() + ")";
    if (report["evidence"] == "GridEvidence") report["warning"] = kGridWarning;
  } else {
    summary = "infeasible: " + report["reason"].get<std::string>() + " (" + report["detail"].get<std::string>() + ")";
  }
  return {stamp(std::move(report), command), ok, summary};
}

json certify_continuous(const Options& o, const aes::ContinuousSystem& sys, const aes::SectorBounds& sector) {
  using namespace aes::ct;
  const auto grid = time_grid(o, sys);
  auto xi = supplied_xi(o, sys.dim());

  if (!o.alpha) {
    if (sys.is_constant() && !xi) {
      const auto delays = constant_delays(sys);
      bool positive = aes::is_metzler(sys.a().constant());
      for (const auto& d : delays) positive = positive && aes::is_nonnegative(d.b);
      if (positive) {
        const auto out = certify_positive_system(sys.a().constant(), delays, sector);
        return std::visit([](const auto& v) { return aes::io::to_json(v); }, out);
      }
    }
    const auto out = find_rate_certificate(sys, sector, grid, xi);
    return std::visit([](const auto& v) { return aes::io::to_json(v); }, out);
  }

  const double alpha = *o.alpha;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw aes::InputError("--alpha must be positive");
  if (!xi) {
    const auto found = find_rate_certificate(sys, sector, grid);
    if (const auto* r = std::get_if<aes::Rejection>(&found)) return aes::io::to_json(*r);
    xi = std::get<ContinuousCertificate>(found).xi;
  }
  const RateCheck check = sys.delays().size() <= 1 ? check_single_delay_rate(sys, sector, *xi, alpha, grid)
                                                   : check_multi_delay_rate(sys, sector, *xi, alpha, grid);
  json report;
  if (check.holds) {
    ContinuousCertificate cert;
    cert.xi = *xi;
    cert.alpha = alpha;
    cert.criterion = sys.delays().size() > 1 ? Criterion::MultiDelay : Criterion::SingleDelay;
    cert.margin = check.margin;
    cert.worst_t = check.worst_t;
    cert.evidence = check.evidence;
    report = aes::io::to_json(cert);
  } else {
    report = aes::io::to_json(aes::Rejection{aes::RejectReason::ConditionViolated,
                                             "rate inequality fails at t = " + fmt(check.worst_t) +
                                                 " (margin " + fmt(check.margin) + ")"});
  }
  report["check"] = aes::io::to_json(check);
  return report;
}

json certify_discrete(const Options& o, const aes::DiscreteSystem& sys, const aes::SectorBounds& sector) {
  using namespace aes::dt;
  const auto grid = step_grid(o, sys);
  auto xi = supplied_xi(o, sys.dim());

  if (!o.lambda) {
    const auto out = certify_system(sys, sector, grid, xi);
    return std::visit([](const auto& v) { return aes::io::to_json(v); }, out);
  }

  const double lambda = *o.lambda;
  if (!(lambda > 0.0 && lambda < 1.0)) throw aes::InputError("--lambda must lie in (0, 1)");
  if (!xi) {
    const auto found = certify_system(sys, sector, grid);
    if (const auto* r = std::get_if<aes::Rejection>(&found)) return aes::io::to_json(*r);
    xi = std::get<DiscreteCertificate>(found).xi;
  }
  const RateCheck check = sys.delays().size() <= 1 ? check_single_delay_rate(sys, sector, *xi, lambda, grid)
                                                   : check_multi_delay_rate(sys, sector, *xi, lambda, grid);
  json report;
  if (check.holds) {
    DiscreteCertificate cert;
    cert.xi = *xi;
    cert.lambda = lambda;
    cert.criterion = sys.delays().size() > 1 ? Criterion::MultiDelay : Criterion::SingleDelay;
    cert.margin = check.margin;
    cert.evidence = check.evidence;
    report = aes::io::to_json(cert);
  } else {
    report = aes::io::to_json(aes::Rejection{aes::RejectReason::ConditionViolated,
                                             "rate inequality fails at k = " + fmt(check.worst_k) +
                                                 " (margin " + fmt(check.margin) + ")"});
  }
  report["check"] = aes::io::to_json(check);
  return report;
}

int run_certify(const Options& o) {
  const auto spec = aes::io::load_system(o.input);
  json report = spec.kind == SystemKind::Continuous ? certify_continuous(o, spec.continuous(), spec.sector)
                                                    : certify_discrete(o, spec.discrete(), spec.sector);
  const Outcome out = finish(std::move(report), "certify");
  emit(o, out.report.dump(2) + "\n");
  std::cerr << out.summary << "\n";
  return out.certified ? kExitOk : kExitFail;
}

// --- decay-rate -------------------------------------------------------------

int run_decay_rate(const Options& o) {
  const auto spec = aes::io::load_system(o.input);
  json report;
  std::string summary;
  bool ok = false;
  auto xi = supplied_xi(o, spec.sector.dim());

  if (spec.kind == SystemKind::Continuous) {
    const auto& sys = spec.continuous();
    const auto grid = time_grid(o, sys);
    const auto rb = aes::ct::resolve_bounds(sys, grid);
    if (!xi) {
      const auto found = aes::ct::find_rate_certificate(sys, spec.sector, grid);
      if (const auto* r = std::get_if<aes::Rejection>(&found)) report = aes::io::to_json(*r);
      else xi = std::get<aes::ct::ContinuousCertificate>(found).xi;
    }
    if (xi) {
      const auto profile = aes::ct::decay_profile(rb.a_hat, rb.b_bars, spec.sector, *xi);
      if (const auto* r = std::get_if<aes::Rejection>(&profile)) {
        report = aes::io::to_json(*r);
      } else {
        const auto& p = std::get<aes::ct::DecayProfile>(profile);
        report = {{"status", "certified"}, {"kind", "continuous"}, {"xi", *xi},
                  {"evidence", aes::to_string(rb.evidence)}, {"profile", aes::io::to_json(p)}};
        summary = "alpha_max = " + fmt(p.alpha_max) + " (binding row " + std::to_string(p.binding_row + 1) + ")";
        ok = true;
      }
      if (sys.delays().empty()) {
        const auto window = aes::ct::nondelay_rate_window(sys.a(), spec.sector, *xi, grid);
        if (const auto* w = std::get_if<aes::ct::RateWindow>(&window))
          report["rate_window"] = {{"gamma", w->gamma}, {"delta0", w->delta0}, {"d2", w->d2},
                                   {"alpha_sup", w->alpha_sup}, {"default_alpha", w->default_alpha()}};
      }
    }
  } else {
    const auto& sys = spec.discrete();
    const auto rb = aes::dt::resolve_bounds(sys, step_grid(o, sys));
    if (!xi) {
      const auto found = aes::dt::certify_bounded_system(rb.a_abs, rb.b_abs, spec.sector);
      if (const auto* r = std::get_if<aes::Rejection>(&found)) report = aes::io::to_json(*r);
      else xi = std::get<aes::dt::DiscreteCertificate>(found).xi;
    }
    if (xi) {
      const auto profile = aes::dt::convergence_profile(rb.a_abs, rb.b_abs, spec.sector, *xi);
      if (const auto* r = std::get_if<aes::Rejection>(&profile)) {
        report = aes::io::to_json(*r);
      } else {
        const auto& p = std::get<aes::dt::ConvergenceProfile>(profile);
        report = {{"status", "certified"}, {"kind", "discrete"}, {"xi", *xi},
                  {"evidence", aes::to_string(rb.evidence)}, {"profile", aes::io::to_json(p)}};
        summary = "lambda_max = " + fmt(p.lambda_max) + " (binding row " + std::to_string(p.binding_row + 1) + ")";
        ok = true;
      }
    }
  }
  if (!ok) summary = "infeasible: " + report.value("reason", std::string("?"));
  if (report.value("evidence", "") == "GridEvidence") report["warning"] = kGridWarning;
  emit(o, stamp(std::move(report), "decay-rate").dump(2) + "\n");
  std::cerr << summary << "\n";
  return ok ? kExitOk : kExitFail;
}

// --- simulate ---------------------------------------------------------------

int run_simulate(const Options& o) {
  const auto spec = aes::io::load_system(o.input);
  const std::size_t n = spec.sector.dim();
  const auto f = aes::sim::harness_nonlinearity(spec.sector, o.nonlinearity, o.seed);
  aes::sim::SimulationTrace trace;
  if (spec.kind == SystemKind::Continuous) {
    const auto& sys = spec.continuous();
    const double h = sys.max_delay();
    const double horizon = o.horizon > 0.0 ? o.horizon : (h > 0.0 ? 10.0 * h : 10.0);
    trace = aes::sim::integrate_dde(sys, f, aes::sim::harness_history(n, h, o.history, o.seed), horizon, o.step);
  } else {
    const auto& sys = spec.discrete();
    const int h = sys.max_delay();
    const int horizon = o.horizon > 0.0 ? static_cast<int>(std::lround(o.horizon)) : std::max(50, 10 * h);
    trace = aes::sim::iterate_discrete(sys, f, aes::sim::harness_history(n, h, o.history, o.seed), horizon);
  }
  std::ostringstream csv;
  aes::io::write_trace_csv(csv, trace);
  emit(o, csv.str());
  std::cerr << "simulated " << trace.times.size() << " samples to t = " << fmt(trace.times.back())
            << ", final norm " << fmt(trace.norms.back()) << "\n";
  return kExitOk;
}

// --- validate ---------------------------------------------------------------

int run_validate(const Options& o) {
  const auto spec = aes::io::load_system(o.input);
  const auto cert = aes::io::parse_certificate(aes::io::read_json_file(o.cert));
  if (cert.kind != spec.kind) throw aes::InputError("certificate kind does not match the system");
  if (cert.xi.size() != spec.sector.dim()) throw aes::InputError("certificate dimension does not match the system");

  aes::sim::ValidationOptions opt;
  opt.nonlinearities = o.runs;
  opt.histories = o.histories;
  opt.seed = o.seed;
  opt.horizon = o.horizon;
  opt.step = o.step;
  opt.slack = o.slack;
  opt.threads = o.threads;
  const auto rep = spec.kind == SystemKind::Continuous
                       ? aes::sim::monte_carlo_validate(spec.continuous(), spec.sector, cert.rate, opt)
                       : aes::sim::monte_carlo_validate(spec.discrete(), spec.sector, cert.rate, opt);
  json report = aes::io::to_json(rep);
  report["seed"] = o.seed;
  report["slack"] = o.slack;
  emit(o, stamp(std::move(report), "validate").dump(2) + "\n");
  std::cerr << (rep.pass ? "pass" : "FAIL") << ": " << rep.runs - rep.failed << "/" << rep.runs
            << " runs within the envelope, worst slope " << fmt(rep.worst_slope, 6) << " ("
            << aes::sim::ValidationReport::kBanner << ")\n";
  return rep.pass ? kExitOk : kExitFail;
}

// --- reproduce-examples -----------------------------------------------------

bool line(std::ostream& os, const std::string& text, bool pass) {
  os << text << ": " << (pass ? "PASS" : "FAIL") << "\n";
  return pass;
}

int run_reproduce(const Options& o) {
  std::ostringstream os;
  bool all = true;

  {
    const auto sys = aes::fixtures::example1_system();
    const auto sector = aes::fixtures::example1_sector();
    const aes::Vector xi{1.0, 1.0};
    const auto grid = aes::make_grid(100.0, 0.01);
    const auto check = aes::ct::check_single_delay_rate(sys, sector, xi, 1.0, grid);
    all &= line(os, "example1: rate condition at alpha = 1 on t in [0, 100], worst_t = " + fmt(check.worst_t),
                check.holds && check.worst_t == 0.0);
    const std::vector<aes::ct::DelayBound> bbar{{1.0, aes::fixtures::example1_b_bound()}};
    for (double t : {0.0, 1.0, 5.0}) {
      const auto lhs =
          aes::ct::rate_condition_lhs(aes::metzlerize(sys.a().at(t)), bbar, sector, xi, 1.0);
      const double e = std::exp(1.0);
      const double d = std::max(std::abs(lhs[0] - (-t - 4.0 + e)), std::abs(lhs[1] - (-t - 2.5 + e / 2.0)));
      all &= line(os, "example1: lhs(" + fmt(t) + ") = (" + fmt(lhs[0]) + ", " + fmt(lhs[1]) +
                          ") (|Δ| < 1e-12)",
                  d < 1e-12);
    }
  }
  {
    const auto out = aes::dt::certify_bounded_system(aes::fixtures::example2_a_bound(),
                                                     aes::fixtures::example2_b_bounds(),
                                                     aes::fixtures::example2_sector(), aes::Vector{1.0, 1.0});
    const auto* cert = std::get_if<aes::dt::DiscreteCertificate>(&out);
    const double lm = cert ? cert->profile->lambda_max : 0.0;
    all &= line(os, "example2: lambda_max = " + fmt(lm) + " (|Δ| < 1e-8)",
                cert && std::abs(lm - aes::fixtures::kExample2LambdaMax) < 1e-8);
    if (cert)
      all &= line(os, "example2: rates = (" + fmt(cert->profile->rates[0]) + ", " +
                          fmt(cert->profile->rates[1]) + "), binding row " +
                          std::to_string(cert->profile->binding_row + 1),
                  cert->profile->binding_row == 1);
  }
  emit(o, os.str());
  std::cerr << (all ? "all examples reproduced" : "example reproduction FAILED") << "\n";
  return all ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Absolute exponential stability certificates for delay Persidskii systems"};
  app.require_subcommand(1);
  Options o;

  auto grid_flags = [&](CLI::App* c) {
    c->add_option("--grid-t-max", o.grid_t_max, "Last grid time (last step k for discrete systems)");
    c->add_option("--grid-step", o.grid_step, "Grid spacing (continuous systems)");
  };
  auto xi_flag = [&](CLI::App* c) {
    c->add_option("--xi", o.xi, "Weight vector, comma separated")->delimiter(',');
  };
  auto out_flag = [&](CLI::App* c) { c->add_option("--out", o.out, "Write the report here instead of stdout"); };
  auto sim_flags = [&](CLI::App* c) {
    c->add_option("--horizon", o.horizon, "Simulation horizon (0: default)");
    c->add_option("--step", o.step, "Integration step (continuous systems)");
    c->add_option("--seed", o.seed, "Random seed");
  };

  auto* certify = app.add_subcommand("certify", "Certify a system and write a certificate or an infeasibility report");
  certify->add_option("input", o.input, "System JSON")->required();
  xi_flag(certify);
  certify->add_option("--alpha", o.alpha, "Check this decay rate instead of the maximal one");
  certify->add_option("--lambda", o.lambda, "Check this convergence rate instead of the maximal one");
  grid_flags(certify);
  out_flag(certify);

  auto* decay = app.add_subcommand("decay-rate", "Per-row maximal rates for a weight vector");
  decay->add_option("input", o.input, "System JSON")->required();
  xi_flag(decay);
  grid_flags(decay);
  out_flag(decay);

  auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory and write it as CSV");
  simulate->add_option("input", o.input, "System JSON")->required();
  sim_flags(simulate);
  simulate->add_option("--nonlinearity", o.nonlinearity, "Harness nonlinearity index");
  simulate->add_option("--history", o.history, "Harness initial-function index");
  out_flag(simulate);

  auto* validate = app.add_subcommand("validate", "Monte-Carlo falsification of a certificate");
  validate->add_option("input", o.input, "System JSON")->required();
  validate->add_option("--cert", o.cert, "Certificate written by certify")->required();
  sim_flags(validate);
  validate->add_option("--runs", o.runs, "Number of sampled nonlinearities");
  validate->add_option("--histories", o.histories, "Initial functions per nonlinearity");
  validate->add_option("--slack", o.slack, "Allowed slope excess");
  validate->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  out_flag(validate);

  auto* reproduce = app.add_subcommand("reproduce-examples", "Recompute the shipped examples against their published values");
  out_flag(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*certify) return run_certify(o);
    if (*decay) return run_decay_rate(o);
    if (*simulate) return run_simulate(o);
    if (*validate) return run_validate(o);
    if (*reproduce) return run_reproduce(o);
  } catch (const aes::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const aes::expr::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const aes::expr::EvalError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitInput;
}
