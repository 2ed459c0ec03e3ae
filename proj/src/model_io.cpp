#include "carv/model_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace carv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) schema_error(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema_error(where, std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) schema_error(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_error(where, "non-finite number");
    return v;
}

std::uint64_t count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        schema_error(where, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

Vec numbers(const json& j, const std::string& where) {
    if (!j.is_array()) schema_error(where, "expected an array");
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) schema_error(where, "unknown field '" + key + "'");
    }
}

}  // namespace

Network network_from_json(const json& j) {
    const std::string where = "weights";
    reject_unknown_keys(j, {"format_version", "input_dim", "layers"}, where);
    const std::size_t version = count(field(j, "format_version", where), where + ".format_version");
    if (version != 1) {
        schema_error(where, "unsupported format_version " + std::to_string(version));
    }
    const std::size_t input_dim = count(field(j, "input_dim", where), where + ".input_dim");
    const json& layers = field(j, "layers", where);
    if (!layers.is_array() || layers.empty()) schema_error(where, "layers must be a non-empty array");

    std::vector<Layer> out;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const std::string lw = where + ".layers[" + std::to_string(li) + "]";
        const json& l = layers[li];
        reject_unknown_keys(l, {"weights", "bias", "activation"}, lw);
        const json& w = field(l, "weights", lw);
        if (!w.is_array() || w.empty()) schema_error(lw, "weights must be a non-empty 2-D array");
        const std::size_t rows = w.size();
        std::size_t cols = 0;
        std::vector<double> data;
        for (std::size_t r = 0; r < rows; ++r) {
            Vec row = numbers(w[r], lw + ".weights[" + std::to_string(r) + "]");
            if (r == 0) cols = row.size();
            if (row.size() != cols || cols == 0) schema_error(lw, "weights rows differ in length");
            data.insert(data.end(), row.begin(), row.end());
        }
        Layer layer;
        layer.weights = Mat(rows, cols, std::move(data));
        layer.bias = numbers(field(l, "bias", lw), lw + ".bias");
        const json& act = field(l, "activation", lw);
        if (act == "relu") {
            layer.activation = Activation::relu;
        } else if (act == "linear") {
            layer.activation = Activation::linear;
        } else {
            schema_error(lw, "activation must be \"relu\" or \"linear\"");
        }
        out.push_back(std::move(layer));
    }
    return Network(input_dim, std::move(out));
}

json network_to_json(const Network& net) {
    json layers = json::array();
    for (const Layer& l : net.layers()) {
        json w = json::array();
        for (std::size_t r = 0; r < l.weights.rows(); ++r) {
            auto row = l.weights.row(r);
            w.push_back(std::vector<double>(row.begin(), row.end()));
        }
        layers.push_back({{"weights", std::move(w)},
                          {"bias", l.bias},
                          {"activation", l.activation == Activation::relu ? "relu" : "linear"}});
    }
    return {{"format_version", 1}, {"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(std::string("cannot open ") + what + " file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed ") + what + " file " + path.string() + ": " + e.what());
    }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move output into place: " + path.string() + ": " + ec.message());
    }
}

Network load_network(const fs::path& path) {
    return network_from_json(read_json_file(path, "weights"));
}

void save_network(const Network& net, const fs::path& path) {
    write_text_atomic(path, network_to_json(net).dump() + "\n");
}

Box box_from_json(const json& j) {
    const std::string where = "x0";
    reject_unknown_keys(j, {"lower", "upper"}, where);
    Vec lo = numbers(field(j, "lower", where), where + ".lower");
    Vec hi = numbers(field(j, "upper", where), where + ".upper");
    if (lo.empty()) schema_error(where, "empty box");
    try {
        return Box(std::move(lo), std::move(hi));
    } catch (const Error& e) {
        schema_error(where, std::string("invalid box: ") + e.what());
    }
}

json box_to_json(const Box& b) { return {{"lower", b.lower()}, {"upper", b.upper()}}; }

ConstraintSet constraints_from_json(const json& j) {
    if (!j.is_array()) schema_error("constraints", "expected an array");
    ConstraintSet out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "constraints[" + std::to_string(i) + "]";
        const json& item = j[i];
        const json& type = field(item, "type", where);
        try {
            if (type == "halfspace") {
                reject_unknown_keys(item, {"type", "normal", "offset"}, where);
                out.add(Halfspace{numbers(field(item, "normal", where), where + ".normal"),
                                  number(field(item, "offset", where), where + ".offset")});
            } else if (type == "disk_avoid") {
                reject_unknown_keys(item, {"type", "center", "radius", "coords"}, where);
                Vec center = numbers(field(item, "center", where), where + ".center");
                if (center.size() != 2) schema_error(where, "center must have 2 entries");
                const json& coords = field(item, "coords", where);
                if (!coords.is_array() || coords.size() != 2) {
                    schema_error(where, "coords must have 2 entries");
                }
                DiskAvoid d;
                d.center = {center[0], center[1]};
                d.radius = number(field(item, "radius", where), where + ".radius");
                d.coords = {count(coords[0], where + ".coords"), count(coords[1], where + ".coords")};
                out.add(d);
            } else {
                schema_error(where, "unknown constraint type " + type.dump());
            }
        } catch (const Error& e) {
            const std::string msg = e.what();
            if (msg.rfind(where, 0) == 0) throw;
            schema_error(where, msg);
        }
    }
    return out;
}

json constraints_to_json(const ConstraintSet& c) {
    json out = json::array();
    for (const auto& item : c.items()) {
        if (const auto* h = std::get_if<Halfspace>(&item)) {
            out.push_back({{"type", "halfspace"}, {"normal", h->normal}, {"offset", h->offset}});
        } else {
            const auto& d = std::get<DiskAvoid>(item);
            out.push_back({{"type", "disk_avoid"},
                           {"center", {d.center[0], d.center[1]}},
                           {"radius", d.radius},
                           {"coords", {d.coords[0], d.coords[1]}}});
        }
    }
    return out;
}

Scenario scenario_from_json(const json& j, const fs::path& base_dir) {
    const std::string where = "scenario";
    reject_unknown_keys(j, {"dynamics", "policy", "x0", "constraints", "t_f", "k_max", "mc"},
                        where);
    Scenario s;
    const json& dyn = field(j, "dynamics", where);
    reject_unknown_keys(dyn, {"kind", "dt", "v"}, "dynamics");
    const json& kind = field(dyn, "kind", "dynamics");
    if (kind == "double_integrator") {
        s.dynamics.kind = DynamicsKind::double_integrator;
    } else if (kind == "unicycle") {
        s.dynamics.kind = DynamicsKind::unicycle;
    } else {
        schema_error("dynamics", "unknown kind " + kind.dump());
    }
    s.dynamics.dt = number(field(dyn, "dt", "dynamics"), "dynamics.dt");
    if (!(s.dynamics.dt > 0.0)) schema_error("dynamics", "dt must be positive");
    if (dyn.contains("v")) s.dynamics.v = number(dyn["v"], "dynamics.v");

    const json& policy = field(j, "policy", where);
    if (!policy.is_string()) schema_error(where, "policy must be a path string");
    s.policy_path = policy.get<std::string>();
    fs::path policy_file = s.policy_path;
    if (policy_file.is_relative()) policy_file = base_dir / policy_file;
    s.policy = load_network(policy_file);

    s.x0 = box_from_json(field(j, "x0", where));
    s.constraints = constraints_from_json(field(j, "constraints", where));
    s.t_f = count(field(j, "t_f", where), "scenario.t_f");
    s.k_max = count(field(j, "k_max", where), "scenario.k_max");
    if (j.contains("mc")) {
        const json& mc = j["mc"];
        reject_unknown_keys(mc, {"n", "seed"}, "mc");
        if (mc.contains("n")) s.mc.n = count(mc["n"], "mc.n");
        if (mc.contains("seed")) s.mc.seed = count(mc["seed"], "mc.seed");
    }
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json dyn = {{"kind", std::string(to_string(s.dynamics.kind))}, {"dt", s.dynamics.dt}};
    if (s.dynamics.kind == DynamicsKind::unicycle) dyn["v"] = s.dynamics.v;
    return {{"dynamics", std::move(dyn)},
            {"policy", s.policy_path},
            {"x0", box_to_json(s.x0)},
            {"constraints", constraints_to_json(s.constraints)},
            {"t_f", s.t_f},
            {"k_max", s.k_max},
            {"mc", {{"n", s.mc.n}, {"seed", s.mc.seed}}}};
}

Scenario load_scenario(const fs::path& path) {
    const json j = read_json_file(path, "scenario");
    return scenario_from_json(j, path.parent_path());
}

void save_scenario(const Scenario& s, const fs::path& path) {
    write_text_atomic(path, scenario_to_json(s).dump(2) + "\n");
}

}  // namespace carv
