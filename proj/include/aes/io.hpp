#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include <json.hpp>

#include "aes/certify_ct.hpp"
#include "aes/certify_dt.hpp"
#include "aes/simulate.hpp"
#include "aes/system.hpp"

/// JSON system descriptions, JSON reports and CSV traces.
///
/// System document:
///   { "kind": "continuous" | "discrete",        optional
///     "n": 2,
///     "A": [[-1, "sin(t)"], [0, -2]],           numbers or expressions in t
///     "delays": [{"h": 1, "B": [[...]]}],
///     "sector": {"delta": [...], "beta": [...]} or {"beta": [...]},
///     "bounds": {"A": [[...]], "B": [[[...]], null]} }  optional, partial
/// Without "kind" a sector lacking "delta" means a discrete system.
namespace aes::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "aescert 1.0.0";

enum class SystemKind { Continuous, Discrete };

struct SystemSpec {
  SystemKind kind;
  std::variant<ContinuousSystem, DiscreteSystem> system;
  SectorBounds sector;

  const ContinuousSystem& continuous() const { return std::get<ContinuousSystem>(system); }
  const DiscreteSystem& discrete() const { return std::get<DiscreteSystem>(system); }
};

/// Throws InputError (or expr::ParseError) on schema violations.
SystemSpec parse_system(const json& doc);
SystemSpec load_system(const std::string& path);
json read_json_file(const std::string& path);

json to_json(const Matrix& m);
json to_json(const ct::DecayProfile& p);
json to_json(const dt::ConvergenceProfile& p);
json to_json(const ct::ContinuousCertificate& c);
json to_json(const dt::DiscreteCertificate& c);
json to_json(const Rejection& r);
json to_json(const ct::RateCheck& r);
json to_json(const dt::RateCheck& r);
json to_json(const sim::ValidationReport& r);
json to_json(const sim::EnvelopeReport& r);

/// Rate and weights read back from a certificate report.
struct CertificateRef {
  SystemKind kind;
  Vector xi;
  double rate;  // alpha or lambda
};

/// Accepts exactly what the certify command writes.
CertificateRef parse_certificate(const json& doc);

/// Header t,x1,...,xn,norm; numbers with 17 significant digits.
void write_trace_csv(std::ostream& os, const sim::SimulationTrace& trace);

}  // namespace aes::io
