#include <doctest.h>

#include <json.hpp>

#include "isaclab/config.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/experiment.hpp"

using namespace isac;

TEST_SUITE("experiment-config") {

TEST_CASE("empty document gives the default scenario") {
    for (const char* text : {"", "  \n", "{}"}) {
        const ExperimentConfig c = parse_config(text);
        CHECK(c.seed == 1);
        CHECK(c.power.power_dbm == 0.0);
        const NoiseAndPower np = c.power.linear();
        CHECK(np.power == doctest::Approx(1.0));
        CHECK(np.noise_user == doctest::Approx(1e-9));
        CHECK(np.noise_radar == doctest::Approx(1e-9));
        CHECK(c.weights.alpha_com == 0.5);
        CHECK(c.weights.alpha_sen == 0.5);
        CHECK(c.weights.eta == 5e6);
        CHECK(c.scenario.kappa_com == 0.3);
        CHECK(c.scenario.kappa_sen == 0.3);
        const SystemDims& d = c.scenario.dims;
        CHECK(d.n_bs == 2);
        CHECK(d.n_users == 2);
        CHECK(d.n_targets == 2);
        CHECK(d.n_rf == 6);
        CHECK(d.n_tx == 8);
        CHECK(d.n_user_ant == 2);
        CHECK(d.n_radar_ant == 4);
        CHECK(c.train.learning_rate == 1e-3);
        CHECK(c.receive == ReceiveMode::Mvdr);
        CHECK(c.csi.spec.model == CsiErrorModel::None);
    }
}

TEST_CASE("dBm conversions") {
    CHECK(dbm_to_mw(0.0) == 1.0);
    CHECK(dbm_to_mw(30.0) == doctest::Approx(1000.0));
    CHECK(dbm_to_mw(-90.0) == doctest::Approx(1e-9));
    CHECK(mw_to_dbm(dbm_to_mw(17.5)) == doctest::Approx(17.5));
}

TEST_CASE("unknown keys are reported with their path") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"train": {"iters": 5}})"), "config.train.iters: unknown key", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sweep": {"grids": {"powr": [1]}}})"),
                         doctest::Contains("config.sweep.grids.powr: unknown key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"colour": 1})"), doctest::Contains("config.colour"), ConfigError);
}

TEST_CASE("type errors are reported with their path") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"system": {"n_bs": 1.5}})"), doctest::Contains("config.system.n_bs"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"train": {"learning_rate": "fast"}})"),
                         doctest::Contains("config.train.learning_rate"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"objective": {"receive": "rake"}})"),
                         doctest::Contains("config.objective.receive"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"system": 3})"), doctest::Contains("config.system"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("invalid JSON"), ConfigError);
}

TEST_CASE("constraint violations name the inequality") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"system": {"n_users": 4, "n_targets": 3}})"),
                         doctest::Contains("I + J <= N"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"system": {"n_rf": 10}})"), doctest::Contains("N <= N_t"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"objective": {"alpha_com": -1}})"), doctest::Contains("config.objective"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sweep": {"schemes": ["gnn", "wmmse"]}})"), doctest::Contains("wmmse"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sweep": {"grids": {"alpha_sen": [1.5]}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"latency": {"bus_bits": [96]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"final_lr_fraction": 2}})"), ConfigError);
}

TEST_CASE("canonical JSON round-trips with a stable hash") {
    const ExperimentConfig c = parse_config(R"({"seed": 7, "objective": {"alpha_sen": 0.7, "alpha_com": 0.3},
                                                "csi": {"model": "bounded", "eps_com": 0.1}})");
    const std::string text = config_to_json(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(config_to_json(back) == text);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    CHECK(config_hash(c) != config_hash(parse_config("")));
    CHECK(back.csi.spec.model == CsiErrorModel::Bounded);
}

TEST_CASE("metadata reflects the resolved configuration") {
    const ExperimentConfig c = parse_config(R"({"objective": {"alpha_sen": 0.7, "alpha_com": 0.3}})");
    const auto meta = nlohmann::json::parse(experiment::metadata_json(c, "sweep", R"({"var": "power"})"));
    CHECK(meta["command"] == "sweep");
    CHECK(meta["config_hash"] == config_hash(c));
    CHECK(meta["code_version"] == experiment::code_version());
    CHECK(meta["var"] == "power");
    CHECK(meta["config"]["objective"]["alpha_sen"].get<double>() == 0.7);
    CHECK(meta["seed"].get<std::uint64_t>() == 1);
}

TEST_CASE("objective setup mirrors the config") {
    ExperimentConfig c = parse_config(R"({"power": {"power_dbm": 10}, "objective": {"receive": "matched"}})");
    const ObjectiveSetup s = c.objective();
    CHECK(s.noise.power == doctest::Approx(10.0));
    CHECK(s.receive == ReceiveMode::Matched);
    CHECK(s.weights.eta == 5e6);
}

}  // TEST_SUITE
