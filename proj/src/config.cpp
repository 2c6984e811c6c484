#include "isaclab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "isaclab/baselines.hpp"
#include "isaclab/errors.hpp"

namespace isac {

using json = nlohmann::json;

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) {
    if (!(mw > 0.0)) throw DomainError("mw_to_dbm needs a positive power");
    return 10.0 * std::log10(mw);
}

NoiseAndPower PowerConfig::linear() const {
    NoiseAndPower np;
    np.power = dbm_to_mw(power_dbm);
    np.noise_user = dbm_to_mw(noise_user_dbm);
    np.noise_radar = dbm_to_mw(noise_radar_dbm);
    return np;
}

ObjectiveSetup ExperimentConfig::objective() const {
    ObjectiveSetup s;
    s.weights = weights;
    s.noise = power.linear();
    s.receive = receive;
    s.eta_in_sensing = eta_in_sensing;
    return s;
}

namespace {

// Walks one JSON object, remembers which keys were read and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    Reader child(const char* key) {
        used_.insert(key);
        return Reader(j_.at(key), path_ + "." + key);
    }

    void get(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) fail(key, "expected an integer");
            const auto x = v->get<long long>();
            if (x < INT32_MIN || x > INT32_MAX) fail(key, "integer out of range");
            out = static_cast<int>(x);
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) fail(key, "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key, "must be finite");
        }
    }
    void get(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) fail(key, "expected true or false");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) fail(key, "expected a string");
            out = v->get<std::string>();
        }
    }
    void get(const char* key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) fail(key, "expected an array of numbers");
            std::vector<double> r;
            for (std::size_t k = 0; k < v->size(); ++k) {
                if (!(*v)[k].is_number()) fail(key, "element " + std::to_string(k) + " is not a number");
                r.push_back((*v)[k].get<double>());
            }
            out = std::move(r);
        }
    }
    void get(const char* key, std::vector<int>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) fail(key, "expected an array of integers");
            std::vector<int> r;
            for (std::size_t k = 0; k < v->size(); ++k) {
                if (!(*v)[k].is_number_integer()) fail(key, "element " + std::to_string(k) + " is not an integer");
                r.push_back((*v)[k].get<int>());
            }
            out = std::move(r);
        }
    }
    void get(const char* key, std::vector<std::string>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) fail(key, "expected an array of strings");
            std::vector<std::string> r;
            for (std::size_t k = 0; k < v->size(); ++k) {
                if (!(*v)[k].is_string()) fail(key, "element " + std::to_string(k) + " is not a string");
                r.push_back((*v)[k].get<std::string>());
            }
            out = std::move(r);
        }
    }
    template <typename E, typename Parse>
    void get_enum(const char* key, E& out, Parse parse) {
        std::string s;
        if (!has(key)) return;
        get(key, s);
        try {
            out = parse(s);
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
    }

    // Call after every known key has been read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw ConfigError(path_ + "." + key + ": " + why);
    }

private:
    const json* take(const char* key) {
        used_.insert(key);
        if (!j_.contains(key)) return nullptr;
        return &j_.at(key);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <typename F>
void section(Reader& parent, const char* key, F body) {
    if (!parent.has(key)) return;
    Reader r = parent.child(key);
    body(r);
    r.finish();
}

void check_integral_grid(const std::vector<double>& grid, const char* name, int lo) {
    for (double v : grid)
        if (v != std::floor(v) || v < lo)
            throw ConfigError(std::string("config.sweep.grids.") + name + ": values must be integers >= " + std::to_string(lo));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return c;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    Reader root(doc, "config");
    root.get("seed", c.seed);
    root.get("output_dir", c.output_dir);
    section(root, "system", [&](Reader& r) {
        SystemDims& d = c.scenario.dims;
        r.get("n_bs", d.n_bs);
        r.get("n_users", d.n_users);
        r.get("n_targets", d.n_targets);
        r.get("n_rf", d.n_rf);
        r.get("n_tx", d.n_tx);
        r.get("n_user_ant", d.n_user_ant);
        r.get("n_radar_ant", d.n_radar_ant);
    });
    section(root, "geometry", [&](Reader& r) {
        r.get("spacing_bs", c.scenario.spacing_bs);
        r.get("spacing_user", c.scenario.spacing_user);
        r.get("spacing_radar", c.scenario.spacing_radar);
        r.get("dist_min", c.scenario.dist_min);
        r.get("dist_max", c.scenario.dist_max);
    });
    section(root, "channel", [&](Reader& r) {
        r.get("kappa_com", c.scenario.kappa_com);
        r.get("kappa_sen", c.scenario.kappa_sen);
        r.get("pathloss_ref_db", c.scenario.pathloss.ref_db);
        r.get("pathloss_slope_db", c.scenario.pathloss.slope_db);
        r.get("pathloss_ref_distance", c.scenario.pathloss.ref_distance);
    });
    section(root, "power", [&](Reader& r) {
        r.get("power_dbm", c.power.power_dbm);
        r.get("noise_user_dbm", c.power.noise_user_dbm);
        r.get("noise_radar_dbm", c.power.noise_radar_dbm);
    });
    section(root, "objective", [&](Reader& r) {
        r.get("alpha_com", c.weights.alpha_com);
        r.get("alpha_sen", c.weights.alpha_sen);
        r.get("eta", c.weights.eta);
        r.get_enum("receive", c.receive, parse_receive_mode);
        r.get("eta_in_sensing", c.eta_in_sensing);
    });
    section(root, "csi", [&](Reader& r) {
        r.get_enum("model", c.csi.spec.model, parse_csi_model);
        r.get("eps_com", c.csi.spec.eps_com);
        r.get("eps_sen", c.csi.spec.eps_sen);
        r.get("sigma2_com", c.csi.spec.sigma2_com);
        r.get("sigma2_sen", c.csi.spec.sigma2_sen);
        r.get("relative", c.csi.spec.relative);
        r.get("eval_draws", c.csi.eval_draws);
    });
    section(root, "gnn", [&](Reader& r) {
        r.get("hidden", c.gnn.hidden);
        r.get("embed", c.gnn.embed);
        r.get("conv_hidden", c.gnn.conv_hidden);
        r.get("conv_layers", c.gnn.conv_layers);
        r.get("shared_weights", c.gnn.shared_weights);
        r.get("normalize_inputs", c.gnn.normalize_inputs);
        r.get("analog_init_scale", c.gnn.analog_init_scale);
        r.get("analog_bias_uniform", c.gnn.analog_bias_uniform);
    });
    section(root, "train", [&](Reader& r) {
        r.get("iterations", c.train.iterations);
        r.get("samples_per_iteration", c.train.samples_per_iteration);
        r.get("steps_per_epoch", c.train.steps_per_epoch);
        r.get("learning_rate", c.train.learning_rate);
        r.get("warmup", c.train.warmup);
        r.get("final_lr_fraction", c.train.final_lr_fraction);
        r.get_enum("optimizer", c.train.optimizer, ad::parse_optimizer);
        r.get("error_draws", c.train.error_draws);
        r.get_enum("mode", c.train.mode, gnn::parse_train_mode);
    });
    section(root, "sweep", [&](Reader& r) {
        r.get("draws", c.sweep.draws);
        r.get("schemes", c.sweep.schemes);
        r.get("csi_model", c.sweep.csi_model);
        r.get("centralized_zf", c.sweep.centralized_zf);
        r.get("jobs", c.sweep.jobs);
        section(r, "grids", [&](Reader& g) {
            g.get("power_dbm", c.sweep.power_dbm);
            g.get("n_bs", c.sweep.n_bs);
            g.get("n_users", c.sweep.n_users);
            g.get("n_targets", c.sweep.n_targets);
            g.get("alpha_sen", c.sweep.alpha_sen);
            g.get("csi", c.sweep.csi);
        });
    });
    section(root, "converge", [&](Reader& r) {
        r.get("n_bs", c.converge.n_bs);
        r.get("kappa", c.converge.kappa);
    });
    section(root, "latency", [&](Reader& r) {
        r.get("bits", c.latency.bits);
        r.get("bus_bits", c.latency.bus_bits);
        r.get("array_size", c.latency.accelerator.array_size);
        r.get("clock_ns", c.latency.accelerator.clock_ns);
        r.get("buffer_bytes", c.latency.accelerator.buffer_bytes);
        r.get("fused", c.latency.accelerator.fused);
        r.get("checkpoint", c.latency.checkpoint);
        r.get("accuracy_draws", c.latency.accuracy_draws);
    });
    root.finish();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

void ExperimentConfig::validate() const {
    const auto wrap = [](const char* where, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("config.") + where + ": " + e.what());
        }
    };
    wrap("system", [&] { scenario.dims.validate(); });
    if (!(scenario.dist_min > 0.0) || scenario.dist_max < scenario.dist_min)
        throw ConfigError("config.geometry: need 0 < dist_min <= dist_max");
    if (scenario.kappa_com < 0.0 || scenario.kappa_sen < 0.0) throw ConfigError("config.channel: kappa must be >= 0");
    if (!(scenario.pathloss.ref_distance > 0.0)) throw ConfigError("config.channel.pathloss_ref_distance: must be > 0");
    wrap("objective", [&] { weights.validate(); });
    wrap("power", [&] { power.linear().validate(); });
    wrap("csi", [&] { csi.spec.validate(); });
    if (csi.eval_draws < 1) throw ConfigError("config.csi.eval_draws: must be >= 1");
    wrap("gnn", [&] {
        gnn::GnnConfig g = gnn;
        g.dims = scenario.dims;
        g.validate();
    });
    wrap("train", [&] { train.validate(); });
    if (sweep.draws < 1) throw ConfigError("config.sweep.draws: must be >= 1");
    if (sweep.jobs < 1) throw ConfigError("config.sweep.jobs: must be >= 1");
    if (sweep.schemes.empty()) throw ConfigError("config.sweep.schemes: must not be empty");
    for (const auto& s : sweep.schemes) {
        if (s == "gnn") continue;
        try {
            baselines::parse_baseline(s);
        } catch (const ConfigError&) {
            throw ConfigError("config.sweep.schemes: unknown scheme '" + s + "' (expected gnn, mrt, zf or mmse)");
        }
    }
    wrap("sweep.csi_model", [&] { parse_csi_model(sweep.csi_model); });
    check_integral_grid(sweep.n_bs, "n_bs", 1);
    check_integral_grid(sweep.n_users, "n_users", 0);
    check_integral_grid(sweep.n_targets, "n_targets", 0);
    for (double a : sweep.alpha_sen)
        if (a < 0.0 || a > 1.0) throw ConfigError("config.sweep.grids.alpha_sen: values must lie in [0, 1]");
    for (double v : sweep.csi)
        if (v < 0.0) throw ConfigError("config.sweep.grids.csi: values must be >= 0");
    for (int m : converge.n_bs)
        if (m < 1) throw ConfigError("config.converge.n_bs: values must be >= 1");
    for (double k : converge.kappa)
        if (k < 0.0) throw ConfigError("config.converge.kappa: values must be >= 0");
    for (int b : latency.bits)
        if (b < 2 || b > 32) throw ConfigError("config.latency.bits: values must lie in [2, 32]");
    for (int b : latency.bus_bits) {
        fpga::AcceleratorConfig a = latency.accelerator;
        a.bus_bits = b;
        wrap("latency", [&] { a.validate(); });
    }
    wrap("latency", [&] { latency.accelerator.validate(); });
    if (latency.accuracy_draws < 0) throw ConfigError("config.latency.accuracy_draws: must be >= 0");
}

std::string config_to_json(const ExperimentConfig& c) {
    const SystemDims& d = c.scenario.dims;
    const CsiErrorSpec& e = c.csi.spec;
    const auto& t = c.train;
    const auto& a = c.latency.accelerator;
    const json doc{
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"system",
         {{"n_bs", d.n_bs},
          {"n_users", d.n_users},
          {"n_targets", d.n_targets},
          {"n_rf", d.n_rf},
          {"n_tx", d.n_tx},
          {"n_user_ant", d.n_user_ant},
          {"n_radar_ant", d.n_radar_ant}}},
        {"geometry",
         {{"spacing_bs", c.scenario.spacing_bs},
          {"spacing_user", c.scenario.spacing_user},
          {"spacing_radar", c.scenario.spacing_radar},
          {"dist_min", c.scenario.dist_min},
          {"dist_max", c.scenario.dist_max}}},
        {"channel",
         {{"kappa_com", c.scenario.kappa_com},
          {"kappa_sen", c.scenario.kappa_sen},
          {"pathloss_ref_db", c.scenario.pathloss.ref_db},
          {"pathloss_slope_db", c.scenario.pathloss.slope_db},
          {"pathloss_ref_distance", c.scenario.pathloss.ref_distance}}},
        {"power",
         {{"power_dbm", c.power.power_dbm},
          {"noise_user_dbm", c.power.noise_user_dbm},
          {"noise_radar_dbm", c.power.noise_radar_dbm}}},
        {"objective",
         {{"alpha_com", c.weights.alpha_com},
          {"alpha_sen", c.weights.alpha_sen},
          {"eta", c.weights.eta},
          {"receive", to_string(c.receive)},
          {"eta_in_sensing", c.eta_in_sensing}}},
        {"csi",
         {{"model", to_string(e.model)},
          {"eps_com", e.eps_com},
          {"eps_sen", e.eps_sen},
          {"sigma2_com", e.sigma2_com},
          {"sigma2_sen", e.sigma2_sen},
          {"relative", e.relative},
          {"eval_draws", c.csi.eval_draws}}},
        {"gnn",
         {{"hidden", c.gnn.hidden},
          {"embed", c.gnn.embed},
          {"conv_hidden", c.gnn.conv_hidden},
          {"conv_layers", c.gnn.conv_layers},
          {"shared_weights", c.gnn.shared_weights},
          {"normalize_inputs", c.gnn.normalize_inputs},
          {"analog_init_scale", c.gnn.analog_init_scale},
          {"analog_bias_uniform", c.gnn.analog_bias_uniform}}},
        {"train",
         {{"iterations", t.iterations},
          {"samples_per_iteration", t.samples_per_iteration},
          {"steps_per_epoch", t.steps_per_epoch},
          {"learning_rate", t.learning_rate},
          {"warmup", t.warmup},
          {"final_lr_fraction", t.final_lr_fraction},
          {"optimizer", ad::to_string(t.optimizer)},
          {"error_draws", t.error_draws},
          {"mode", gnn::to_string(t.mode)}}},
        {"sweep",
         {{"draws", c.sweep.draws},
          {"schemes", c.sweep.schemes},
          {"csi_model", c.sweep.csi_model},
          {"centralized_zf", c.sweep.centralized_zf},
          {"jobs", c.sweep.jobs},
          {"grids",
           {{"power_dbm", c.sweep.power_dbm},
            {"n_bs", c.sweep.n_bs},
            {"n_users", c.sweep.n_users},
            {"n_targets", c.sweep.n_targets},
            {"alpha_sen", c.sweep.alpha_sen},
            {"csi", c.sweep.csi}}}}},
        {"converge", {{"n_bs", c.converge.n_bs}, {"kappa", c.converge.kappa}}},
        {"latency",
         {{"bits", c.latency.bits},
          {"bus_bits", c.latency.bus_bits},
          {"array_size", a.array_size},
          {"clock_ns", a.clock_ns},
          {"buffer_bytes", a.buffer_bytes},
          {"fused", a.fused},
          {"checkpoint", c.latency.checkpoint},
          {"accuracy_draws", c.latency.accuracy_draws}}},
    };
    return doc.dump(2);
}

std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : config_to_json(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace isac
