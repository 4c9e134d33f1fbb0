#include <doctest.h>

#include <string>

#include <json.hpp>

#include "archopt.h"

using nlohmann::json;

namespace {

struct Session {
  archopt_session* s = archopt_session_new();
  ~Session() { archopt_session_free(s); }
};

std::string take(char* out) {
  std::string data = out ? out : "";
  archopt_string_free(out);
  return data;
}

constexpr const char* kHardware =
    R"({"peak_flops": 1e13, "bandwidth_bytes_per_s": 5e10, "memory_budget_bytes": 4e9})";
constexpr const char* kWorkload = R"({"batch": 1, "seq_in": 1024, "seq_out": 16})";

}  // namespace

TEST_CASE("shared-library loss prediction") {
  Session ses;
  char* out = nullptr;
  const auto rc = archopt_predict_loss(
      ses.s, R"({"layers": 16, "width": 1024, "ffn_ratio": 4.0})", nullptr, &out);
  REQUIRE(rc == ARCHOPT_OK);
  const json j = json::parse(take(out));
  double sum = 0.0;
  for (const auto& [k, v] : j.at("terms").items()) sum += v.get<double>();
  CHECK(j.at("loss").get<double>() == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("error statuses and messages") {
  Session ses;
  char* out = nullptr;
  CHECK(archopt_predict_loss(ses.s, "{bad json", nullptr, &out) == ARCHOPT_PARSE_ERROR);
  CHECK(out == nullptr);
  CHECK(std::string(archopt_last_error(ses.s)).size() > 0);

  CHECK(archopt_predict_loss(
            ses.s, R"({"layers": 16, "width": 1024, "ffn_ratio": 4, "activation_rate": 0})",
            nullptr, &out) == ARCHOPT_VALIDATION_ERROR);
  CHECK(std::string(archopt_last_error(ses.s)).find("activation_rate") != std::string::npos);

  // A later success clears the error.
  CHECK(archopt_predict_loss(ses.s, R"({"layers": 16, "width": 1024, "ffn_ratio": 4})", nullptr,
                             &out) == ARCHOPT_OK);
  CHECK(std::string(archopt_last_error(ses.s)).empty());
  archopt_string_free(out);
}

TEST_CASE("latency report over the C boundary") {
  Session ses;
  char* out = nullptr;
  const auto rc = archopt_predict_latency(
      ses.s, R"({"layers": 16, "width": 1024, "ffn_ratio": 4.0})", kHardware, kWorkload,
      R"({"mode": "full"})", &out);
  REQUIRE(rc == ARCHOPT_OK);
  const json j = json::parse(take(out));
  CHECK(j.at("latency").at("total_s").get<double>() > 0.0);
  CHECK(j.at("prefill").is_object());
  CHECK(j.at("decode").is_object());
  CHECK(j.at("csv").get<std::string>().rfind("op,phase,", 0) == 0);

  // seq_out = 0: no decode section.
  const auto rc2 = archopt_predict_latency(
      ses.s, R"({"layers": 16, "width": 1024, "ffn_ratio": 4.0})", kHardware,
      R"({"batch": 1, "seq_in": 1024, "seq_out": 0})", nullptr, &out);
  REQUIRE(rc2 == ARCHOPT_OK);
  CHECK(json::parse(take(out)).at("decode").is_null());
}

TEST_CASE("solve and verify over the C boundary") {
  Session ses;
  char* out = nullptr;
  json req;
  req["hardware"] = json::parse(kHardware);
  req["workload"] = json::parse(kWorkload);
  req["targets"] = json{{"t_decode", 0.1}};
  req["case"] = "auto";
  req["width"] = json{{"mode", "fixed"}, {"value", 1024.0}};
  req["verify"] = true;
  const auto rc = archopt_solve(ses.s, req.dump().c_str(), &out);
  REQUIRE(rc == ARCHOPT_OK);
  const json j = json::parse(take(out));
  CHECK(j.at("case").is_string());
  CHECK(j.at("loss").get<double>() > 0.0);
  CHECK(j.at("theta_snapped").at("head_dim").get<int>() == 64);
  const double gap = j.at("oracle").at("loss_gap_rel").get<double>();
  CHECK(gap < 1e-3);

  // Infeasible dual prefill case maps to the infeasible status.
  req["case"] = "p3";
  req["targets"] = json{{"t_prefill", 10.0}};
  req["verify"] = false;
  CHECK(archopt_solve(ses.s, req.dump().c_str(), &out) == ARCHOPT_INFEASIBLE);
}

TEST_CASE("fit over the C boundary") {
  Session ses;
  std::string csv = "layers,width,ffn_ratio,activation_rate,gqa,loss\n";
  // Tiny grid of synthetic observations (reference-law values, rounded).
  const double losses[4][2] = {{3.64, 3.50}, {3.55, 3.41}, {3.51, 3.37}, {3.49, 3.35}};
  int i = 0;
  for (int l : {8, 16, 24, 32}) {
    int w = 0;
    for (int d : {768, 1536}) {
      csv += std::to_string(l) + "," + std::to_string(d) + ",4,1,1," +
             std::to_string(losses[i][w]) + "\n";
      ++w;
    }
    ++i;
  }
  for (int l : {8, 16, 24, 32})
    for (int d : {768, 1536})
      csv += std::to_string(l) + "," + std::to_string(d) + ",4,0.125,4,3.30\n";
  char* out = nullptr;
  const auto rc = archopt_fit(ses.s, csv.c_str(), R"({"holdout_fraction": 0, "multistarts": 2})",
                              &out);
  INFO(archopt_last_error(ses.s));
  REQUIRE(rc == ARCHOPT_OK);
  const json j = json::parse(take(out));
  CHECK(j.at("coeffs").at("source").get<std::string>() == "fit");
  CHECK(j.at("report").at("validation_r2").is_null());
}

TEST_CASE("pareto over the C boundary") {
  Session ses;
  json req;
  req["hardware"] = json::parse(kHardware);
  req["workload"] = json::parse(kWorkload);
  req["objective"] = "decode";
  req["precision"] = "int8";
  req["options"] = json{{"seed", 1}, {"enumerate", true}};
  char* out = nullptr;
  const auto rc = archopt_pareto(ses.s, req.dump().c_str(), &out);
  REQUIRE(rc == ARCHOPT_OK);
  const json j = json::parse(take(out));
  CHECK(j.at("points").size() > 0);
  CHECK(j.at("csv").get<std::string>().rfind("latency_s,loss,", 0) == 0);
  CHECK(j.at("xy").get<std::string>().rfind("latency_s,loss\n", 0) == 0);
  for (const auto& p : j.at("points")) CHECK(p.at("precision").get<std::string>() == "int8");
}

TEST_CASE("version string") { CHECK(std::string(archopt_version()).size() > 0); }
