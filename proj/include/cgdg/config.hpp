// Configuration front end: a small sectioned key-value file format with
// line-number-carrying errors, a scalar expression language for custom
// initial data, and the named presets shipped with the command-line tool.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cgdg/mesh.hpp"
#include "cgdg/spaces.hpp"

namespace cgdg {

// --- raw config file ---------------------------------------------------------

// Parsed "[section]" / "key = value" text. Keys are addressed as
// "section.key". Every typed getter records the access so unknown (never
// read) keys can be reported with their line numbers.
class ConfigFile {
  public:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };

    ConfigFile() = default;
    ConfigFile(std::string label, std::map<std::string, Entry> entries)
        : label_(std::move(label)), entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    // Getters throw Error("<label>:<line>: ...") on malformed values; the
    // fallback is returned when the key is absent.
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);
    bool get_flag(const std::string& key, bool fallback);  // on/off, true/false, 1/0

    // Insert a default unless the key is already present (preset merging).
    void set_default(const std::string& key, const std::string& value);

    // Throws listing every never-read key with its line number.
    void reject_unused() const;

    const std::string& label() const { return label_; }
    int line_of(const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> sorted_entries() const;

  private:
    const Entry* find(const std::string& key) const;
    std::string label_;
    std::map<std::string, Entry> entries_;
};

ConfigFile parse_config_text(const std::string& text, const std::string& label);
ConfigFile parse_config_file(const std::string& path);

// --- expression language ------------------------------------------------------

// Compiles "0.5*exp(-r^2/(2*0.05^2)) + step(0.25 - r)" style expressions of
// the variables x, y, r = |x| into a callable. Supported: + - * / ^, unary
// minus, parentheses, pi, and sin cos tan exp log sqrt abs tanh step (step(e)
// = 1 for e >= 0, else 0). Throws on malformed input, naming the offending
// token.
ScalarFn parse_expression(const std::string& text);

// --- resolved run configuration ------------------------------------------------

struct CircleSpec {
    Vec2 center{};
    double radius = 0.0;
};

struct RunConfig {
    // [system]
    std::string system = "acoustics";  // acoustics | maxwell | euler
    double rho = 1.0, c = 1.0, gamma = 1.4;

    // [mesh]
    std::string mesh_source = "generate";  // generate | file
    int nx = 20, ny = 20;
    std::array<double, 4> box{0.0, 0.0, 1.0, 1.0};
    double perturb = 0.2;
    std::uint64_t seed = 1;
    std::string mesh_path;

    // [scheme]
    int degree = 3;
    std::string scheme = "cgdg";            // cgdg | fv0-entropy
    std::string reconstruction = "l2";      // l2 | nscheme
    bool viscosity = false;
    double chi = 1.0;
    std::string integrator = "auto";        // auto | ssprk3 | rk4
    double cfl = 0.4;
    double t_end = 0.0;
    double fixed_dt = 0.0;

    // [initial]
    std::string preset;  // empty means expression-defined data
    std::map<std::string, std::string> expressions;  // raw text by short key

    // [diagnostics]
    std::vector<Vec2> points;
    std::vector<CircleSpec> circles;
    int cadence = 10;
    bool energy_series = true;
    bool involution_series = true;

    // [output]
    std::string out_prefix = "out";
    bool write_vtk = true;
    bool write_csv = true;
    bool cut_y0 = false;
    int cut_samples = 400;
};

// The names accepted by [initial] preset; each fully determines a complete
// experiment (system, domain, mesh density, degree, viscosity, final time,
// initial data, and for the shock test the observation points and circles).
const std::vector<std::string>& run_preset_names();

// Merges preset defaults into absent keys, reads and validates every field,
// and rejects unknown keys. Errors carry "<label>:<line>:" context.
RunConfig resolve_run_config(ConfigFile& file);

}  // namespace cgdg
