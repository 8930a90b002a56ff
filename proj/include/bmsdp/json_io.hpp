#pragma once

#include "bmsdp/rtr.hpp"

#include <json.hpp>

namespace bmsdp {

using Json = nlohmann::json;

/// Malformed-input error carrying the JSON path of the offending field.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string &path, const std::string &what)
      : std::runtime_error("invalid field `" + path + "`: " + what), field(path) {}
  std::string field;
};

Json sym_to_json(const SymMatrix &M);
SymMatrix sym_from_json(const Json &j, const std::string &path);

Json problem_to_json(const SdpProblem &problem);
SdpProblem problem_from_json(const Json &j);

Json factor_to_json(const Matrix &Y);
Matrix factor_from_json(const Json &j);

Json certificate_to_json(const DualCertificate &cert);
Json face_report_to_json(const FaceReport &rep);
Json solve_report_to_json(const SolveReport &rep);

} // namespace bmsdp
