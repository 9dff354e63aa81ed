#include "aes/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace aes::io {

namespace {

const json& require(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  return doc.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(where + ": non-finite number");
  return x;
}

// A number, or a string holding a constant expression such as "1/3".
double scalar(const json& v, const std::string& where) {
  if (!v.is_string()) return number(v, where);
  const auto e = expr::Expression::parse(v.get<std::string>());
  if (!e.is_constant()) throw InputError(where + ": expected a constant");
  return e.eval(0.0);
}

Vector vector_of(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n)
    throw InputError(where + ": expected an array of " + std::to_string(n) + " numbers");
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = scalar(v[i], where);
  return out;
}

void require_shape(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) throw InputError(where + ": expected " + std::to_string(n) + " rows");
  for (const auto& row : v)
    if (!row.is_array() || row.size() != n)
      throw InputError(where + ": expected " + std::to_string(n) + " columns per row");
}

MatrixExpr matrix_expr(const json& v, std::size_t n, const std::string& where) {
  require_shape(v, n, where);
  std::vector<Entry> entries;
  entries.reserve(n * n);
  for (const auto& row : v)
    for (const auto& e : row) {
      if (e.is_string())
        entries.emplace_back(expr::Expression::parse(e.get<std::string>()));
      else
        entries.emplace_back(number(e, where));
    }
  return MatrixExpr(n, std::move(entries));
}

Matrix const_matrix(const json& v, std::size_t n, const std::string& where) {
  const MatrixExpr m = matrix_expr(v, n, where);
  if (!m.is_constant()) throw InputError(where + ": bound matrices must be constant");
  return m.constant();
}

std::optional<AssertedBounds> parse_bounds(const json& doc, std::size_t n, std::size_t delays) {
  if (!doc.contains("bounds") || doc.at("bounds").is_null()) return std::nullopt;
  const json& b = doc.at("bounds");
  if (!b.is_object()) throw InputError("bounds: expected an object");
  AssertedBounds out;
  if (b.contains("A") && !b.at("A").is_null()) out.a = const_matrix(b.at("A"), n, "bounds.A");
  if (b.contains("B") && !b.at("B").is_null()) {
    const json& bs = b.at("B");
    if (!bs.is_array() || bs.size() != delays)
      throw InputError("bounds.B: expected one entry (or null) per delay");
    for (std::size_t l = 0; l < delays; ++l) {
      if (bs[l].is_null())
        out.b.emplace_back(std::nullopt);
      else
        out.b.emplace_back(const_matrix(bs[l], n, "bounds.B[" + std::to_string(l) + "]"));
    }
  }
  return out;
}

json vec(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

SystemSpec parse_system(const json& doc) {
  if (!doc.is_object()) throw InputError("system document must be a JSON object");
  const json& nj = require(doc, "n", "system");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) throw InputError("n: expected a positive integer");
  const auto n = static_cast<std::size_t>(nj.get<long long>());

  const json& sj = require(doc, "sector", "system");
  if (!sj.is_object()) throw InputError("sector: expected an object");
  const Vector beta = vector_of(require(sj, "beta", "sector"), n, "sector.beta");
  const bool has_delta = sj.contains("delta") && !sj.at("delta").is_null();

  SystemKind kind = has_delta ? SystemKind::Continuous : SystemKind::Discrete;
  if (doc.contains("kind")) {
    const json& k = doc.at("kind");
    if (k == "continuous")
      kind = SystemKind::Continuous;
    else if (k == "discrete")
      kind = SystemKind::Discrete;
    else
      throw InputError("kind: expected \"continuous\" or \"discrete\"");
  }
  if (kind == SystemKind::Continuous && !has_delta)
    throw InputError("sector.delta is required for continuous systems");

  SectorBounds sector = kind == SystemKind::Continuous
                            ? SectorBounds::bounded(vector_of(sj.at("delta"), n, "sector.delta"), beta)
                            : SectorBounds::positive_up_to(beta);

  const MatrixExpr a = matrix_expr(require(doc, "A", "system"), n, "A");
  json delays = json::array();
  if (doc.contains("delays") && !doc.at("delays").is_null()) delays = doc.at("delays");
  if (!delays.is_array()) throw InputError("delays: expected an array");
  auto bounds = parse_bounds(doc, n, delays.size());

  if (kind == SystemKind::Continuous) {
    std::vector<ContinuousDelay> ds;
    for (std::size_t l = 0; l < delays.size(); ++l) {
      const std::string where = "delays[" + std::to_string(l) + "]";
      ds.push_back({scalar(require(delays[l], "h", where), where + ".h"),
                    matrix_expr(require(delays[l], "B", where), n, where + ".B")});
    }
    return {kind, ContinuousSystem(a, std::move(ds), std::move(bounds)), std::move(sector)};
  }
  std::vector<DiscreteDelay> ds;
  for (std::size_t l = 0; l < delays.size(); ++l) {
    const std::string where = "delays[" + std::to_string(l) + "]";
    const json& h = require(delays[l], "h", where);
    if (!h.is_number_integer()) throw InputError(where + ".h: expected an integer");
    ds.push_back({h.get<int>(), matrix_expr(require(delays[l], "B", where), n, where + ".B")});
  }
  return {kind, DiscreteSystem(a, std::move(ds), std::move(bounds)), std::move(sector)};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

SystemSpec load_system(const std::string& path) { return parse_system(read_json_file(path)); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i)));
  return rows;
}

json to_json(const ct::DecayProfile& p) {
  return {{"rates", vec(p.rates)}, {"alpha_max", p.alpha_max}, {"binding_row", p.binding_row + 1}};
}

json to_json(const dt::ConvergenceProfile& p) {
  return {{"rates", vec(p.rates)},
          {"lambda_max", p.lambda_max},
          {"binding_row", p.binding_row + 1},
          {"degenerate", p.degenerate}};
}

json to_json(const ct::ContinuousCertificate& c) {
  json j = {{"status", "certified"},
            {"kind", "continuous"},
            {"criterion", ct::to_string(c.criterion)},
            {"evidence", to_string(c.evidence)},
            {"xi", vec(c.xi)},
            {"alpha", c.alpha},
            {"margin", c.margin},
            {"worst_t", c.worst_t}};
  if (c.profile) j["profile"] = to_json(*c.profile);
  return j;
}

json to_json(const dt::DiscreteCertificate& c) {
  json j = {{"status", "certified"},
            {"kind", "discrete"},
            {"criterion", dt::to_string(c.criterion)},
            {"evidence", to_string(c.evidence)},
            {"xi", vec(c.xi)},
            {"lambda", c.lambda},
            {"margin", c.margin}};
  if (c.profile) j["profile"] = to_json(*c.profile);
  return j;
}

json to_json(const Rejection& r) {
  return {{"status", "infeasible"},
          {"reason", to_string(r.reason)},
          {"detail", r.detail},
          {"spectral_value", r.spectral_value}};
}

json to_json(const ct::RateCheck& r) {
  return {{"holds", r.holds},
          {"margin", r.margin},
          {"worst_t", r.worst_t},
          {"worst_lhs", vec(r.worst_lhs)},
          {"evidence", to_string(r.evidence)}};
}

json to_json(const dt::RateCheck& r) {
  return {{"holds", r.holds},
          {"margin", r.margin},
          {"worst_k", r.worst_k},
          {"worst_defect", vec(r.worst_defect)},
          {"evidence", to_string(r.evidence)}};
}

json to_json(const sim::ValidationReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"nonlinearity", f.nonlinearity}, {"history", f.history}, {"what", f.what}});
  return {{"banner", sim::ValidationReport::kBanner},
          {"pass", r.pass},
          {"runs", r.runs},
          {"failed", r.failed},
          {"rate", r.rate},
          {"horizon", r.horizon},
          {"worst_m_fit", r.worst_m_fit},
          {"worst_slope", r.worst_slope},
          {"failures", failures}};
}

json to_json(const sim::EnvelopeReport& r) {
  json j = {{"rate", r.rate}, {"m_fit", r.m_fit}, {"pass", r.pass}, {"degenerate", r.degenerate}};
  // -inf has no JSON representation.
  j["slope_fit"] = std::isfinite(r.slope_fit) ? json(r.slope_fit) : json(nullptr);
  return j;
}

CertificateRef parse_certificate(const json& doc) {
  if (!doc.is_object()) throw InputError("certificate must be a JSON object");
  if (doc.value("status", "") != "certified") throw InputError("certificate: status is not \"certified\"");
  const json& k = require(doc, "kind", "certificate");
  CertificateRef ref{};
  if (k == "continuous") {
    ref.kind = SystemKind::Continuous;
    ref.rate = number(require(doc, "alpha", "certificate"), "certificate.alpha");
  } else if (k == "discrete") {
    ref.kind = SystemKind::Discrete;
    ref.rate = number(require(doc, "lambda", "certificate"), "certificate.lambda");
  } else {
    throw InputError("certificate.kind: expected \"continuous\" or \"discrete\"");
  }
  const json& xi = require(doc, "xi", "certificate");
  if (!xi.is_array() || xi.empty()) throw InputError("certificate.xi: expected a nonempty array");
  ref.xi = vector_of(xi, xi.size(), "certificate.xi");
  return ref;
}

void write_trace_csv(std::ostream& os, const sim::SimulationTrace& trace) {
  const std::size_t n = trace.states.empty() ? 0 : trace.states.front().size();
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  os << ",norm\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    put(trace.times[k]);
    for (double x : trace.states[k]) {
      os << ',';
      put(x);
    }
    os << ',';
    put(trace.norms[k]);
    os << '\n';
  }
}

}  // namespace aes::io
