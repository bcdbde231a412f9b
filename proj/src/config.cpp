#include "cgdg/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail_at(const std::string& label, int line, const std::string& msg) {
    throw Error(label + ":" + std::to_string(line) + ": " + msg);
}

bool valid_name(const std::string& s, bool allow_dash) {
    if (s.empty()) return false;
    for (char c : s) {
        if (std::islower((unsigned char)c) || std::isdigit((unsigned char)c) || c == '_') continue;
        if (allow_dash && c == '-') continue;
        return false;
    }
    return true;
}

}  // namespace

// --- ConfigFile ----------------------------------------------------------------

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    return it->second.value;
}

double ConfigFile::get_double(const std::string& key, double fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    const std::string& v = it->second.value;
    size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        fail_at(label_, it->second.line, "expected a number for '" + key + "', got '" + v + "'");
    }
    if (trim(v.substr(pos)) != "")
        fail_at(label_, it->second.line, "expected a number for '" + key + "', got '" + v + "'");
    return out;
}

int ConfigFile::get_int(const std::string& key, int fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    double d = get_double(key, 0.0);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        fail_at(label_, it->second.line, "expected an integer for '" + key + "'");
    return (int)d;
}

std::uint64_t ConfigFile::get_uint64(const std::string& key, std::uint64_t fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    const std::string v = trim(it->second.value);
    std::uint64_t out = 0;
    size_t pos = 0;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        fail_at(label_, it->second.line, "expected a non-negative integer for '" + key + "'");
    }
    if (pos != v.size())
        fail_at(label_, it->second.line, "expected a non-negative integer for '" + key + "'");
    return out;
}

bool ConfigFile::get_flag(const std::string& key, bool fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    const std::string v = trim(it->second.value);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail_at(label_, it->second.line, "expected on/off for '" + key + "', got '" + v + "'");
}

void ConfigFile::set_default(const std::string& key, const std::string& value) {
    if (entries_.count(key)) return;
    Entry e;
    e.value = value;
    e.line = 0;  // synthetic, never reported as unused
    e.used = false;
    entries_[key] = e;
}

int ConfigFile::line_of(const std::string& key) const {
    const Entry* e = find(key);
    return e ? e->line : 0;
}

void ConfigFile::reject_unused() const {
    std::string report;
    for (const auto& [key, e] : entries_) {
        if (e.used || e.line == 0) continue;
        if (!report.empty()) report += "; ";
        report += label_ + ":" + std::to_string(e.line) + ": unknown or unused key '" + key + "'";
    }
    if (!report.empty()) throw Error(report);
}

std::vector<std::pair<std::string, std::string>> ConfigFile::sorted_entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(entries_.size());
    for (const auto& [key, e] : entries_) out.emplace_back(key, e.value);
    return out;  // std::map iterates in key order
}

ConfigFile parse_config_text(const std::string& text, const std::string& label) {
    std::map<std::string, ConfigFile::Entry> entries;
    std::istringstream in(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail_at(label, line_no, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section, false))
                fail_at(label, line_no, "invalid section name '" + section + "'");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail_at(label, line_no, "expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key, false))
            fail_at(label, line_no, "invalid key name '" + key + "'");
        if (value.empty()) fail_at(label, line_no, "empty value for '" + key + "'");
        if (section.empty()) fail_at(label, line_no, "key '" + key + "' outside of any [section]");
        std::string full = section + "." + key;
        auto prev = entries.find(full);
        if (prev != entries.end())
            fail_at(label, line_no,
                    "duplicate key '" + full + "' (first set on line " +
                        std::to_string(prev->second.line) + ")");
        ConfigFile::Entry e;
        e.value = value;
        e.line = line_no;
        entries[full] = e;
    }
    return ConfigFile(label, std::move(entries));
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

// --- expression language ---------------------------------------------------------

namespace {

struct ExprParser {
    const std::string& text;
    size_t pos = 0;

    explicit ExprParser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("expression '" + text + "': " + msg);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    ScalarFn parse() {
        ScalarFn e = expr();
        skip_ws();
        if (pos != text.size()) fail("unexpected trailing input at '" + text.substr(pos) + "'");
        return e;
    }

    ScalarFn expr() {
        ScalarFn lhs = term();
        while (true) {
            if (eat('+')) {
                ScalarFn rhs = term();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) + rhs(p); };
            } else if (eat('-')) {
                ScalarFn rhs = term();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) - rhs(p); };
            } else {
                return lhs;
            }
        }
    }

    ScalarFn term() {
        ScalarFn lhs = unary();
        while (true) {
            if (eat('*')) {
                ScalarFn rhs = unary();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) * rhs(p); };
            } else if (eat('/')) {
                ScalarFn rhs = unary();
                lhs = [lhs, rhs](Vec2 p) { return lhs(p) / rhs(p); };
            } else {
                return lhs;
            }
        }
    }

    ScalarFn unary() {
        if (eat('-')) {
            ScalarFn e = unary();
            return [e](Vec2 p) { return -e(p); };
        }
        return power();
    }

    ScalarFn power() {
        ScalarFn base = primary();
        if (eat('^')) {
            ScalarFn exp = unary();  // right associative, exponent may be signed
            return [base, exp](Vec2 p) { return std::pow(base(p), exp(p)); };
        }
        return base;
    }

    ScalarFn primary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            ScalarFn e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit((unsigned char)c) || c == '.') return number();
        if (std::isalpha((unsigned char)c)) return ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    ScalarFn number() {
        size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit((unsigned char)text[pos]) || text[pos] == '.')) ++pos;
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            size_t mark = pos++;
            if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
            if (pos < text.size() && std::isdigit((unsigned char)text[pos])) {
                while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
            } else {
                pos = mark;  // the 'e' was not an exponent
            }
        }
        double v = 0.0;
        try {
            size_t used = 0;
            v = std::stod(text.substr(start, pos - start), &used);
            if (used != pos - start) fail("malformed number");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail("malformed number '" + text.substr(start, pos - start) + "'");
        }
        return [v](Vec2) { return v; };
    }

    ScalarFn ident() {
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum((unsigned char)text[pos]) || text[pos] == '_')) ++pos;
        std::string name = text.substr(start, pos - start);
        if (peek() == '(') {
            ++pos;  // consume '('
            ScalarFn arg = expr();
            if (!eat(')')) fail("missing ')' after arguments of '" + name + "'");
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = std::sin;
            else if (name == "cos") fn = std::cos;
            else if (name == "tan") fn = std::tan;
            else if (name == "exp") fn = std::exp;
            else if (name == "log") fn = std::log;
            else if (name == "sqrt") fn = std::sqrt;
            else if (name == "abs") fn = std::fabs;
            else if (name == "tanh") fn = std::tanh;
            else if (name == "step") fn = [](double v) { return v >= 0.0 ? 1.0 : 0.0; };
            else fail("unknown function '" + name + "'");
            return [fn, arg](Vec2 p) { return fn(arg(p)); };
        }
        if (name == "x") return [](Vec2 p) { return p.x; };
        if (name == "y") return [](Vec2 p) { return p.y; };
        if (name == "r") return [](Vec2 p) { return std::hypot(p.x, p.y); };
        if (name == "pi") return [](Vec2) { return 3.14159265358979323846; };
        fail("unknown variable '" + name + "'");
    }
};

}  // namespace

ScalarFn parse_expression(const std::string& text) {
    ExprParser p(text);
    return p.parse();
}

// --- presets and resolution -------------------------------------------------------

namespace {

// Each preset is a complete experiment: the defaults below fill every key the
// user did not set explicitly, so a config file can consist of nothing but
// "[initial] preset = ...".
std::vector<std::pair<std::string, std::string>> preset_defaults(const std::string& name) {
    using KV = std::pair<std::string, std::string>;
    std::vector<KV> kv;
    auto centered_box = [&kv](const char* nx) {
        kv.push_back({"mesh.box", "-0.5 -0.5 0.5 0.5"});
        kv.push_back({"mesh.nx", nx});
        kv.push_back({"mesh.ny", nx});
    };
    if (name == "acoustic-gaussian") {
        kv.push_back({"system.name", "acoustics"});
        centered_box("30");
        kv.push_back({"scheme.t_end", "10"});
        kv.push_back({"scheme.viscosity", "off"});
    } else if (name == "acoustic-explosion") {
        kv.push_back({"system.name", "acoustics"});
        centered_box("42");
        kv.push_back({"scheme.t_end", "0.1"});
        kv.push_back({"scheme.viscosity", "on"});
    } else if (name == "maxwell-gaussian") {
        kv.push_back({"system.name", "maxwell"});
        centered_box("30");
        kv.push_back({"scheme.t_end", "10"});
        kv.push_back({"scheme.viscosity", "off"});
    } else if (name == "maxwell-explosion") {
        kv.push_back({"system.name", "maxwell"});
        centered_box("42");
        kv.push_back({"scheme.t_end", "0.1"});
        kv.push_back({"scheme.viscosity", "on"});
    } else if (name == "vortex") {
        kv.push_back({"system.name", "euler"});
        kv.push_back({"mesh.box", "0 0 10 10"});
        kv.push_back({"mesh.nx", "20"});
        kv.push_back({"mesh.ny", "20"});
        kv.push_back({"scheme.t_end", "0.2"});
        kv.push_back({"scheme.viscosity", "off"});
    } else if (name == "sod-circular") {
        kv.push_back({"system.name", "euler"});
        centered_box("42");
        kv.push_back({"scheme.t_end", "0.1"});
        kv.push_back({"scheme.viscosity", "on"});
        kv.push_back({"scheme.chi", "1"});
        kv.push_back({"diagnostics.points", "(-0.3, 0) (-0.25, 0) (-0.2, 0) (-0.15, 0)"});
        kv.push_back({"diagnostics.circles",
                      "(-0.3, -0.005, 0.015) (-0.19, 0, 0.015) (-0.39, 0.025, 0.015)"});
        kv.push_back({"output.cut_y0", "on"});
    } else {
        return {};
    }
    kv.push_back({"scheme.degree", "3"});
    return kv;
}

// Parses "(a, b) (c, d, e) ..." into tuples; `arity` fixes the per-tuple count.
std::vector<std::vector<double>> parse_tuples(const std::string& text, size_t arity,
                                              const std::string& label, int line,
                                              const std::string& key) {
    std::vector<std::vector<double>> out;
    size_t pos = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(label + ":" + std::to_string(line) + ": " + key + ": " + msg);
    };
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
        if (pos >= text.size()) break;
        if (text[pos] != '(') fail("expected '(' in tuple list");
        size_t close = text.find(')', pos);
        if (close == std::string::npos) fail("missing ')'");
        std::string body = text.substr(pos + 1, close - pos - 1);
        pos = close + 1;
        std::vector<double> tuple;
        std::istringstream in(body);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            try {
                size_t used = 0;
                double v = std::stod(item, &used);
                if (trim(item.substr(used)) != "") throw std::invalid_argument(item);
                tuple.push_back(v);
            } catch (const std::exception&) {
                fail("malformed number '" + item + "'");
            }
        }
        if (tuple.size() != arity)
            fail("expected " + std::to_string(arity) + " numbers per tuple, got " +
                 std::to_string(tuple.size()));
        out.push_back(tuple);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& run_preset_names() {
    static const std::vector<std::string> names = {
        "acoustic-gaussian", "acoustic-explosion", "maxwell-gaussian",
        "maxwell-explosion", "vortex",             "sod-circular"};
    return names;
}

RunConfig resolve_run_config(ConfigFile& file) {
    const std::string& label = file.label();
    auto fail_key = [&](const std::string& key, const std::string& msg) {
        int line = file.line_of(key);
        if (line > 0) fail_at(label, line, msg);
        throw Error(label + ": " + msg);
    };

    // Preset defaults are merged before anything is read so explicit keys win.
    std::string preset = file.get_string("initial.preset", "");
    if (!preset.empty()) {
        auto defaults = preset_defaults(preset);
        if (defaults.empty()) {
            std::string known;
            for (const auto& n : run_preset_names()) known += (known.empty() ? "" : ", ") + n;
            fail_key("initial.preset", "unknown preset '" + preset + "' (known: " + known + ")");
        }
        for (const auto& [k, v] : defaults) file.set_default(k, v);
    }

    RunConfig cfg;
    cfg.preset = preset;

    // [system]
    cfg.system = file.get_string("system.name", cfg.system);
    if (cfg.system != "acoustics" && cfg.system != "maxwell" && cfg.system != "euler")
        fail_key("system.name", "unknown system '" + cfg.system + "'");
    cfg.rho = file.get_double("system.rho", cfg.rho);
    cfg.c = file.get_double("system.c", cfg.c);
    cfg.gamma = file.get_double("system.gamma", cfg.gamma);
    if (cfg.rho <= 0.0) fail_key("system.rho", "density must be positive");
    if (cfg.c <= 0.0) fail_key("system.c", "sound speed must be positive");
    if (cfg.gamma <= 1.0) fail_key("system.gamma", "gamma must exceed 1");

    // [mesh]
    cfg.mesh_source = file.get_string("mesh.source", cfg.mesh_source);
    if (cfg.mesh_source != "generate" && cfg.mesh_source != "file")
        fail_key("mesh.source", "mesh source must be 'generate' or 'file'");
    cfg.nx = file.get_int("mesh.nx", cfg.nx);
    cfg.ny = file.get_int("mesh.ny", cfg.ny);
    if (cfg.nx < 1) fail_key("mesh.nx", "nx must be at least 1");
    if (cfg.ny < 1) fail_key("mesh.ny", "ny must be at least 1");
    std::string box = file.get_string("mesh.box", "");
    if (!box.empty()) {
        std::istringstream in(box);
        if (!(in >> cfg.box[0] >> cfg.box[1] >> cfg.box[2] >> cfg.box[3]))
            fail_key("mesh.box", "box must be four numbers 'x0 y0 x1 y1'");
        std::string rest;
        if (in >> rest) fail_key("mesh.box", "box must be four numbers 'x0 y0 x1 y1'");
    }
    if (!(cfg.box[2] > cfg.box[0] && cfg.box[3] > cfg.box[1]))
        fail_key("mesh.box", "box must satisfy x1 > x0 and y1 > y0");
    cfg.perturb = file.get_double("mesh.perturb", cfg.perturb);
    if (!(cfg.perturb >= 0.0 && cfg.perturb < 0.3))
        fail_key("mesh.perturb", "perturb must be in [0, 0.3)");
    cfg.seed = file.get_uint64("mesh.seed", cfg.seed);
    cfg.mesh_path = file.get_string("mesh.path", cfg.mesh_path);
    if (cfg.mesh_source == "file" && cfg.mesh_path.empty())
        throw Error(label + ": mesh.source = file requires mesh.path");

    // [scheme]
    cfg.degree = file.get_int("scheme.degree", cfg.degree);
    if (cfg.degree < 0 || cfg.degree > 4)
        fail_key("scheme.degree", "degree must be between 0 and 4");
    cfg.scheme = file.get_string("scheme.name", cfg.scheme);
    if (cfg.scheme != "cgdg" && cfg.scheme != "fv0-entropy")
        fail_key("scheme.name", "scheme must be 'cgdg' or 'fv0-entropy'");
    cfg.reconstruction = file.get_string("scheme.reconstruction", cfg.reconstruction);
    if (cfg.reconstruction != "l2" && cfg.reconstruction != "nscheme")
        fail_key("scheme.reconstruction", "reconstruction must be 'l2' or 'nscheme'");
    // The node-based scheme's dissipation is part of its stability construction,
    // so it defaults on there.
    if (cfg.scheme == "fv0-entropy") cfg.viscosity = true;
    cfg.viscosity = file.get_flag("scheme.viscosity", cfg.viscosity);
    cfg.chi = file.get_double("scheme.chi", cfg.chi);
    if (cfg.chi < 0.0) fail_key("scheme.chi", "chi must be non-negative");
    cfg.integrator = file.get_string("scheme.integrator", cfg.integrator);
    if (cfg.integrator != "auto" && cfg.integrator != "ssprk3" && cfg.integrator != "rk4")
        fail_key("scheme.integrator", "integrator must be auto, ssprk3, or rk4");
    cfg.cfl = file.get_double("scheme.cfl", cfg.cfl);
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) fail_key("scheme.cfl", "cfl must be in (0, 1]");
    cfg.t_end = file.get_double("scheme.t_end", cfg.t_end);
    if (cfg.t_end < 0.0) fail_key("scheme.t_end", "t_end must be non-negative");
    cfg.fixed_dt = file.get_double("scheme.fixed_dt", cfg.fixed_dt);
    if (cfg.fixed_dt < 0.0) fail_key("scheme.fixed_dt", "fixed_dt must be non-negative");

    if (cfg.scheme == "fv0-entropy") {
        if (cfg.system != "euler")
            fail_key("scheme.name", "fv0-entropy supports only system.name = euler");
        if (cfg.degree != 0)
            fail_key("scheme.degree", "fv0-entropy requires scheme.degree = 0");
    }

    // [initial] — either a preset or per-system expressions. Expressions are
    // compiled here so syntax errors surface with config line numbers.
    auto take_expr = [&](const std::string& short_key, const char* fallback) {
        std::string key = "initial." + short_key;
        std::string text = file.get_string(key, fallback ? fallback : "");
        if (text.empty())
            throw Error(label + ": system '" + cfg.system + "' needs " + key +
                        " when no preset is set");
        try {
            parse_expression(text);
        } catch (const Error& e) {
            fail_key(key, e.what());
        }
        cfg.expressions[short_key] = text;
    };
    if (preset.empty()) {
        if (cfg.system == "acoustics") {
            take_expr("scalar_potential", "0");
            take_expr("pressure", "0");
        } else if (cfg.system == "maxwell") {
            take_expr("potential_b", "0");
            take_expr("potential_e", "0");
            take_expr("bz", "0");
            take_expr("ez", "0");
        } else {
            take_expr("density", nullptr);
            take_expr("velocity_x", "0");
            take_expr("velocity_y", "0");
            take_expr("pressure", nullptr);
        }
    }

    // [diagnostics]
    std::string pts = file.get_string("diagnostics.points", "");
    if (!pts.empty()) {
        for (const auto& t : parse_tuples(pts, 2, label, file.line_of("diagnostics.points"),
                                          "diagnostics.points"))
            cfg.points.push_back(Vec2{t[0], t[1]});
    }
    std::string circ = file.get_string("diagnostics.circles", "");
    if (!circ.empty()) {
        for (const auto& t : parse_tuples(circ, 3, label, file.line_of("diagnostics.circles"),
                                          "diagnostics.circles"))
            cfg.circles.push_back(CircleSpec{Vec2{t[0], t[1]}, t[2]});
    }
    cfg.cadence = file.get_int("diagnostics.cadence", cfg.cadence);
    if (cfg.cadence < 1) fail_key("diagnostics.cadence", "cadence must be at least 1");
    cfg.energy_series = file.get_flag("diagnostics.energy", cfg.energy_series);
    cfg.involution_series = file.get_flag("diagnostics.involutions", cfg.involution_series);

    if (cfg.scheme == "fv0-entropy" && !(cfg.points.empty() && cfg.circles.empty()))
        fail_key("scheme.name",
                 "observation points and circles are not supported with fv0-entropy");

    // Geometric validation against the requested box (generated meshes only;
    // file meshes are checked after loading).
    if (cfg.mesh_source == "generate") {
        for (const auto& p : cfg.points) {
            if (!(p.x > cfg.box[0] && p.x < cfg.box[2] && p.y > cfg.box[1] && p.y < cfg.box[3]))
                fail_key("diagnostics.points", "observation point lies outside the domain");
        }
        for (const auto& c : cfg.circles) {
            if (!(c.radius > 0.0))
                fail_key("diagnostics.circles", "circle radius must be positive");
            if (!(c.center.x - c.radius > cfg.box[0] && c.center.x + c.radius < cfg.box[2] &&
                  c.center.y - c.radius > cfg.box[1] && c.center.y + c.radius < cfg.box[3]))
                fail_key("diagnostics.circles", "circle must lie strictly inside the domain");
        }
    }

    // [output]
    cfg.out_prefix = file.get_string("output.prefix", cfg.out_prefix);
    if (cfg.out_prefix.empty()) fail_key("output.prefix", "output prefix must not be empty");
    cfg.write_vtk = file.get_flag("output.vtk", cfg.write_vtk);
    cfg.write_csv = file.get_flag("output.csv", cfg.write_csv);
    cfg.cut_y0 = file.get_flag("output.cut_y0", cfg.cut_y0);
    cfg.cut_samples = file.get_int("output.cut_samples", cfg.cut_samples);
    if (cfg.cut_samples < 2) fail_key("output.cut_samples", "cut_samples must be at least 2");

    file.reject_unused();
    return cfg;
}

}  // namespace cgdg
