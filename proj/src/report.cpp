#include "pnorm/report.hpp"

namespace pnorm {

void to_json(nlohmann::json& j, const SolveReport& report) {
  j = nlohmann::json{{"iterations", report.iterations},
                     {"oracle_calls", report.oracle_calls},
                     {"objective_trace", report.objective_trace},
                     {"nu_trace", report.nu_trace},
                     {"wall_time", report.wall_time}};
}

void from_json(const nlohmann::json& j, SolveReport& report) {
  j.at("iterations").get_to(report.iterations);
  j.at("oracle_calls").get_to(report.oracle_calls);
  j.at("objective_trace").get_to(report.objective_trace);
  j.at("nu_trace").get_to(report.nu_trace);
  j.at("wall_time").get_to(report.wall_time);
}

std::string deterministic_fingerprint(const SolveReport& report) {
  nlohmann::json j = report;
  j.erase("wall_time");
  return j.dump();
}

}  // namespace pnorm
