#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lindyn/config.hpp"

using namespace lindyn;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const char* kHardyClassify = R"({
  "command": "classify",
  "operator": {
    "kind": "backward_shift",
    "space": {"index_set": "unilateral", "p": 2, "origin": 0,
              "seminorms": {"kind": "weighted", "family": "ones"}}
  },
  "seed": 7
})";

}  // namespace

TEST_CASE("operator and space serialization round-trips") {
    const std::string op_json = R"({
      "kind": "scalar_multiple", "lambda": [0.0, 1.0],
      "child": {"kind": "backward_shift",
                "space": {"index_set": "bilateral", "p": 2, "seminorms": {"kind": "unit"}},
                "weights": {"tail_neg": [0.5], "tail_pos": [2.0]}}
    })";
    const OperatorDescriptor op = operator_from_json_text(op_json);
    const std::string dumped = operator_to_json_text(op);
    const OperatorDescriptor back = operator_from_json_text(dumped);
    CHECK(back.render() == op.render());

    const SpaceSpec sp = space_from_json_text(
        R"({"index_set":"unilateral","p":2,"k_max":12,"seminorms":{"kind":"koethe","form":"log_pow_k"}})");
    CHECK(space_from_json_text(space_to_json_text(sp)) == sp);
}

TEST_CASE("classify experiment writes a deterministic report") {
    const auto cfg = parse_experiment(kHardyClassify);
    const auto out1 = std::filesystem::temp_directory_path() / "lindyn_test_a";
    const auto out2 = std::filesystem::temp_directory_path() / "lindyn_test_b";
    CHECK(run_experiment(cfg, out1.string()) == 0);
    CHECK(run_experiment(cfg, out2.string()) == 0);
    const std::string r1 = slurp(out1 / "report.json");
    CHECK(r1.find("ChainRecurrent") != std::string::npos);
    CHECK(r1.find("config_hash") != std::string::npos);
    CHECK(r1 == slurp(out2 / "report.json"));
}

TEST_CASE("chain experiment writes the chain artifact") {
    const std::string text = R"({
      "command": "chain",
      "operator": {"kind": "backward_shift",
                   "space": {"index_set": "unilateral", "p": 2, "seminorms": {"kind": "unit"}}},
      "params": {"i": 1, "delta": 0.5}
    })";
    const auto cfg = parse_experiment(text);
    const auto out = std::filesystem::temp_directory_path() / "lindyn_test_chain";
    CHECK(run_experiment(cfg, out.string()) == 0);
    bool found = false;
    for (const auto& e : std::filesystem::directory_iterator(out))
        found = found || e.path().filename().string().rfind("chain-", 0) == 0;
    CHECK(found);
}

TEST_CASE("NotChainRecurrent classification exits cleanly with evidence") {
    const std::string text = R"({
      "command": "classify",
      "operator": {"kind": "backward_shift",
                   "space": {"index_set": "unilateral", "p": 2, "k_max": 8,
                             "seminorms": {"kind": "koethe", "form": "k_pow_j"}}}
    })";
    const auto out = std::filesystem::temp_directory_path() / "lindyn_test_koethe";
    CHECK(run_experiment(parse_experiment(text), out.string()) == 0);
    const std::string report = slurp(out / "report.json");
    CHECK(report.find("NotChainRecurrent") != std::string::npos);
    CHECK(report.find("convergent") != std::string::npos);
}

TEST_CASE("undecided-dominated results exit with code 3") {
    const std::string text = R"({
      "command": "classify",
      "operator": {"kind": "backward_shift",
                   "space": {"index_set": "unilateral", "p": 2, "seminorms": {"kind": "unit"}},
                   "weights": {"tail_pos": [1.0], "irregular": true}}
    })";
    const auto out = std::filesystem::temp_directory_path() / "lindyn_test_und";
    CHECK(run_experiment(parse_experiment(text), out.string()) == 3);
}

TEST_CASE("demo-entire emits the growth CSV") {
    const std::string text = R"({
      "command": "demo-entire",
      "operator": {"kind": "diagonal", "lambda": 2.0,
                   "space": {"index_set": "unilateral", "p": 2,
                             "seminorms": {"kind": "koethe", "form": "k_pow_j"}}},
      "params": {"lambda": 2.0, "ell": 2, "delta": 0.1, "horizon": 30}
    })";
    const auto out = std::filesystem::temp_directory_path() / "lindyn_test_demo";
    CHECK(run_experiment(parse_experiment(text), out.string()) == 0);
    const std::string csv = slurp(out / "error_growth.csv");
    CHECK(csv.find("horizon,best_poly_degree,error") != std::string::npos);
}

TEST_CASE("invalid configs raise validation errors") {
    CHECK_THROWS_AS(parse_experiment("{not json"), std::exception);
    CHECK_THROWS_AS(parse_experiment(R"({"command":"classify","operator":{"kind":"bogus"}})"),
                    std::invalid_argument);
    const auto cfg = parse_experiment(R"({"command":"wat","operator":{"kind":"diagonal",
        "lambda":1.0,"space":{"index_set":"unilateral","p":2,"seminorms":{"kind":"unit"}}}})");
    const auto out = std::filesystem::temp_directory_path() / "lindyn_test_bad";
    CHECK(run_experiment(cfg, out.string()) == 2);
}
