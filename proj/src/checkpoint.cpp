#include "isaclab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isaclab/errors.hpp"

namespace isac::gnn {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& in) {
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const unsigned v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < in.size()) {
        unsigned v = in[i] << 16;
        if (i + 1 < in.size()) v |= in[i + 1] << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < in.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& in, const std::string& where) {
    int table[256];
    std::fill(std::begin(table), std::end(table), -1);
    for (int k = 0; k < 64; ++k) table[static_cast<unsigned char>(kAlphabet[k])] = k;
    if (in.size() % 4 != 0) throw ConfigError(where + ": base64 length is not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(in.size() / 4 * 3);
    for (std::size_t i = 0; i < in.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = in[i + static_cast<std::size_t>(k)];
            if (c == '=' && i + 4 == in.size() && k >= 2) {
                v[k] = 0;
                ++pad;
            } else {
                v[k] = table[static_cast<unsigned char>(c)];
                if (v[k] < 0 || pad > 0) throw ConfigError(where + ": invalid base64 data");
            }
        }
        const unsigned w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back(static_cast<unsigned char>(w >> 16));
        if (pad < 2) out.push_back(static_cast<unsigned char>((w >> 8) & 255));
        if (pad < 1) out.push_back(static_cast<unsigned char>(w & 255));
    }
    return out;
}

std::vector<unsigned char> to_bytes(std::span<const double> values) {
    std::vector<unsigned char> out(values.size() * 8);
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(values[k]);
        for (int b = 0; b < 8; ++b) out[k * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    return out;
}

json config_json(const GnnConfig& c) {
    const SystemDims& d = c.dims;
    return json{{"n_bs", d.n_bs},
                {"n_users", d.n_users},
                {"n_targets", d.n_targets},
                {"n_rf", d.n_rf},
                {"n_tx", d.n_tx},
                {"n_user_ant", d.n_user_ant},
                {"n_radar_ant", d.n_radar_ant},
                {"hidden", c.hidden},
                {"embed", c.embed},
                {"conv_hidden", c.conv_hidden},
                {"conv_layers", c.conv_layers},
                {"shared_weights", c.shared_weights},
                {"normalize_inputs", c.normalize_inputs},
                {"analog_init_scale", c.analog_init_scale},
                {"analog_bias_uniform", c.analog_bias_uniform}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

GnnConfig config_from_json(const json& j) {
    const std::string w = "checkpoint.config";
    if (!j.is_object()) throw ConfigError(w + ": expected an object");
    GnnConfig c;
    c.dims.n_bs = field<int>(j, "n_bs", w);
    c.dims.n_users = field<int>(j, "n_users", w);
    c.dims.n_targets = field<int>(j, "n_targets", w);
    c.dims.n_rf = field<int>(j, "n_rf", w);
    c.dims.n_tx = field<int>(j, "n_tx", w);
    c.dims.n_user_ant = field<int>(j, "n_user_ant", w);
    c.dims.n_radar_ant = field<int>(j, "n_radar_ant", w);
    c.hidden = field<int>(j, "hidden", w);
    c.embed = field<int>(j, "embed", w);
    c.conv_hidden = field<int>(j, "conv_hidden", w);
    c.conv_layers = field<int>(j, "conv_layers", w);
    c.shared_weights = field<bool>(j, "shared_weights", w);
    c.normalize_inputs = field<bool>(j, "normalize_inputs", w);
    c.analog_init_scale = field<double>(j, "analog_init_scale", w);
    c.analog_bias_uniform = field<bool>(j, "analog_bias_uniform", w);
    c.validate();
    return c;
}

}  // namespace

std::string checkpoint_to_string(const GnnParams& params) {
    json nets = json::array();
    for (const auto& net : params.networks) {
        json entry = json::object();
        for (const auto* p : const_cast<BsNetwork&>(net).parameters()) {
            entry[p->name] = json{{"shape", p->value.shape()}, {"f64le", base64_encode(to_bytes(p->value.data()))}};
        }
        nets.push_back(std::move(entry));
    }
    const json doc{{"format", "isaclab-gnn"},
                   {"version", kCheckpointVersion},
                   {"seed", params.seed},
                   {"config", config_json(params.config)},
                   {"networks", std::move(nets)}};
    return doc.dump(1);
}

GnnParams checkpoint_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "isaclab-gnn")
        throw ConfigError("checkpoint.format: expected \"isaclab-gnn\"");
    const int version = field<int>(doc, "version", "checkpoint");
    if (version != kCheckpointVersion)
        throw ConfigError("checkpoint.version: unsupported version " + std::to_string(version));
    GnnParams p = init_params(config_from_json(doc.at("config")), field<std::uint64_t>(doc, "seed", "checkpoint"));
    const json& nets = doc.at("networks");
    if (!nets.is_array() || nets.size() != p.networks.size())
        throw ConfigError("checkpoint.networks: expected " + std::to_string(p.networks.size()) + " entries");
    for (std::size_t m = 0; m < p.networks.size(); ++m) {
        const json& entry = nets[m];
        const std::string where = "checkpoint.networks[" + std::to_string(m) + "]";
        const auto params = p.networks[m].parameters();
        if (!entry.is_object() || entry.size() != params.size())
            throw ConfigError(where + ": expected " + std::to_string(params.size()) + " parameters");
        for (auto* param : params) {
            const std::string pw = where + "." + param->name;
            if (!entry.contains(param->name)) throw ConfigError(pw + ": missing");
            const json& t = entry.at(param->name);
            const auto shape = field<ad::Shape>(t, "shape", pw);
            if (shape != param->value.shape())
                throw ConfigError(pw + ".shape: expected " + ad::shape_string(param->value.shape()) + ", got " +
                                  ad::shape_string(shape));
            auto data = param->value.data();
            if (t.contains("f64le")) {
                const auto bytes = base64_decode(field<std::string>(t, "f64le", pw), pw + ".f64le");
                if (bytes.size() != data.size() * 8) throw ConfigError(pw + ".f64le: wrong byte count");
                for (std::size_t k = 0; k < data.size(); ++k) {
                    std::uint64_t bits = 0;
                    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[k * 8 + static_cast<std::size_t>(b)]) << (8 * b);
                    data[k] = std::bit_cast<double>(bits);
                }
            } else {
                const auto values = field<std::vector<double>>(t, "values", pw);
                if (values.size() != data.size()) throw ConfigError(pw + ".values: wrong length");
                std::copy(values.begin(), values.end(), data.begin());
            }
            param->grad.fill(0.0);
        }
    }
    return p;
}

void save_checkpoint(const GnnParams& params, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint " + path.string());
    out << checkpoint_to_string(params) << '\n';
    if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

GnnParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("checkpoint not found: " + path.string() + " (run `train` first or pass --checkpoint)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace isac::gnn
