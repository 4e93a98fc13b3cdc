#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trigzero/errors.hpp"
#include "trigzero/spectral.hpp"

namespace trigzero {

using Json = nlohmann::json;

namespace detail {

/// Recursive-descent evaluator for numeric fields written as text:
/// numbers, pi, sqrt(.), + - * /, parentheses and implicit products (3pi).
class ExpressionParser {
public:
    ExpressionParser(std::string_view text, std::string field) : s_(text), field_(std::move(field)) {}

    double parse() {
        const double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidInput(field_ + ": cannot parse \"" + std::string(s_) + "\" (" + why + ")");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool starts_factor() {
        skip();
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' || std::isalpha(static_cast<unsigned char>(c));
    }
    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) {
                v += term();
            } else if (eat('-')) {
                v -= term();
            } else {
                return v;
            }
        }
    }
    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) {
                v *= unary();
            } else if (eat('/')) {
                v /= unary();
            } else if (starts_factor()) {
                v *= unary();
            } else {
                return v;
            }
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return factor();
    }
    double factor() {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const auto word = s_.substr(start, pos_ - start);
            if (word == "pi") return pi;
            if (word == "sqrt") {
                if (!eat('(')) fail("sqrt needs '('");
                const double v = expr();
                if (!eat(')')) fail("missing ')'");
                return std::sqrt(v);
            }
            fail("unknown name '" + std::string(word) + "'");
        }
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        const std::string tail(begin, s_.size() - pos_);
        const double v = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str()) fail("expected a number");
        pos_ += static_cast<std::size_t>(end - tail.c_str());
        return v;
    }

    std::string_view s_;
    std::string field_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline double parse_number_text(std::string_view text, const std::string& field) {
    return detail::ExpressionParser(text, field).parse();
}

/// A JSON number or an expression string such as "pi/2" or "sqrt(2)".
inline double json_number(const Json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_number_text(j.get<std::string>(), field);
    throw InvalidInput(field + ": expected a number or numeric expression");
}

inline double required_number(const Json& obj, const std::string& key, const std::string& prefix) {
    if (!obj.contains(key)) throw InvalidInput(prefix + "." + key + ": missing");
    return json_number(obj.at(key), prefix + "." + key);
}

namespace detail {

inline DensitySpec parse_density(const Json& d, const std::string& prefix) {
    if (!d.is_object() || !d.contains("kind") || !d.at("kind").is_string()) {
        throw InvalidInput(prefix + ".kind: missing or not a string");
    }
    const auto kind = d.at("kind").get<std::string>();
    try {
        if (kind == "uniform" || kind == "independent") return DensitySpec::uniform();
        if (kind == "box") return DensitySpec::box(required_number(d, "a", prefix));
        if (kind == "annulus") return DensitySpec::annulus(required_number(d, "b", prefix), required_number(d, "a", prefix));
        if (kind == "poisson") return DensitySpec::poisson(required_number(d, "r", prefix));
        if (kind == "constant_corr") return DensitySpec::constant_corr(required_number(d, "r", prefix));
        if (kind == "raised_cosine_squared") return DensitySpec::raised_cosine_squared();
        if (kind == "tabulated") {
            if (!d.contains("grid") || !d.contains("values")) throw InvalidInput(prefix + ": tabulated needs grid and values");
            std::vector<double> grid, values;
            for (std::size_t i = 0; i < d.at("grid").size(); ++i) {
                grid.push_back(json_number(d.at("grid")[i], prefix + ".grid[" + std::to_string(i) + "]"));
            }
            for (std::size_t i = 0; i < d.at("values").size(); ++i) {
                values.push_back(json_number(d.at("values")[i], prefix + ".values[" + std::to_string(i) + "]"));
            }
            return DensitySpec::tabulated(std::move(grid), std::move(values));
        }
    } catch (const InvalidInput& e) {
        const std::string msg = e.what();
        if (msg.rfind(prefix, 0) == 0) throw;
        throw InvalidInput(prefix + ": " + msg);
    }
    throw InvalidInput(prefix + ".kind: unknown density kind '" + kind + "'");
}

}  // namespace detail

/// Measure declaration. Accepted shapes:
///   {"kind": "box", "a": "pi/2"}           density only (constant_corr adds its atom at 0)
///   {"kind": "atomic", "alpha": "sqrt(2)"}  single symmetric atom pair of weight 1
///   {"density": {...}, "atoms": [{"alpha": .., "weight": ..}, ...]}
inline SpectralMeasure parse_measure(const Json& m, const std::string& prefix = "measure") {
    if (!m.is_object()) throw InvalidInput(prefix + ": must be an object");
    if (m.contains("kind")) {
        const auto kind = m.at("kind").is_string() ? m.at("kind").get<std::string>() : std::string();
        if (kind == "atomic") {
            const double alpha = required_number(m, "alpha", prefix);
            try {
                return SpectralMeasure::atomic(alpha);
            } catch (const InvalidInput& e) {
                throw InvalidInput(prefix + ".alpha: " + e.what());
            }
        }
        return SpectralMeasure::from_density(detail::parse_density(m, prefix));
    }
    std::optional<DensitySpec> density;
    if (m.contains("density") && !m.at("density").is_null()) density = detail::parse_density(m.at("density"), prefix + ".density");
    std::vector<Atom> atoms;
    if (m.contains("atoms")) {
        const auto& arr = m.at("atoms");
        if (!arr.is_array()) throw InvalidInput(prefix + ".atoms: must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = prefix + ".atoms[" + std::to_string(i) + "]";
            atoms.push_back({required_number(arr[i], "alpha", p), required_number(arr[i], "weight", p)});
        }
    }
    if (!density && atoms.empty()) throw InvalidInput(prefix + ": needs a density or at least one atom");
    return SpectralMeasure(std::move(atoms), std::move(density));
}

/// Command-line form "kind[:key=value,...]", e.g. "box:a=pi/2", "atomic:alpha=sqrt(2)".
inline Json measure_json_from_text(const std::string& text) {
    Json j;
    const auto colon = text.find(':');
    j["kind"] = text.substr(0, colon);
    if (colon == std::string::npos) return j;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidInput("measure: expected key=value, got '" + item + "'");
        j[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return j;
}

inline SpectralMeasure parse_measure_text(const std::string& text) { return parse_measure(measure_json_from_text(text)); }

enum class Task { kacrice_sweep, zero_mc, integrand_profile, szclt, hypotheses, covariance_check };

inline const std::vector<std::pair<Task, std::string>>& task_names() {
    static const std::vector<std::pair<Task, std::string>> names{
        {Task::kacrice_sweep, "kacrice_sweep"}, {Task::zero_mc, "zero_mc"},
        {Task::integrand_profile, "integrand_profile"}, {Task::szclt, "szclt"},
        {Task::hypotheses, "hypotheses"}, {Task::covariance_check, "covariance_check"}};
    return names;
}

inline std::string to_string(Task t) {
    for (const auto& [task, name] : task_names()) {
        if (task == t) return name;
    }
    return "unknown";
}

inline Task parse_task(const std::string& name) {
    for (const auto& [task, n] : task_names()) {
        if (n == name) return task;
    }
    throw InvalidInput("tasks: unknown task '" + name + "'");
}

struct LocalizedConfig {
    std::vector<double> t_points;
    std::vector<double> lambdas;
};

struct Expectations {
    std::optional<double> limit;      // replaces the predicted limit in verdicts
    std::optional<double> tolerance;  // |ratio(max n) - limit| bound
};

struct ScenarioConfig {
    std::string name;
    Json measure_decl;
    SpectralMeasure measure = SpectralMeasure::from_density(DensitySpec::uniform());
    std::vector<std::size_t> degrees;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;
    std::vector<Task> tasks;
    std::string output_dir;
    std::vector<double> t_grid;
    double eta = 0.5;
    double gamma = 0.5;
    std::size_t profile_points = 4096;
    std::size_t max_lag = 8;
    bool dump_samples = false;
    double x0 = 1.0;
    std::vector<LocalizedConfig> localized;
    Expectations expect;
    Json source;  // the document as read, for hashing
};

inline std::vector<LocalizedConfig> default_localized_configs() {
    return {{{0.0, 1.0}, {1.0, -1.0}}, {{0.0, 2.0, 4.0}, {1.0, 1.0, 1.0}}, {{0.5, 3.0}, {2.0, 1.0}}};
}

inline std::vector<double> parse_t_grid(const Json& j) {
    if (j.is_array()) {
        std::vector<double> t;
        for (std::size_t i = 0; i < j.size(); ++i) t.push_back(json_number(j[i], "t_grid[" + std::to_string(i) + "]"));
        return t;
    }
    if (j.is_object()) {
        const auto points = j.value("points", 61);
        const double t_max = j.contains("max") ? json_number(j.at("max"), "t_grid.max") : 3.0;
        if (points < 2) throw InvalidInput("t_grid.points: must be >= 2");
        std::vector<double> t(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = -t_max + 2.0 * t_max * i / (points - 1);
        if (points % 2 == 1) t[static_cast<std::size_t>(points / 2)] = 0.0;
        return t;
    }
    throw InvalidInput("t_grid: expected an array or {points, max}");
}

/// Validates everything, including the measure, before any computation.
inline ScenarioConfig parse_config(const Json& j) {
    if (!j.is_object()) throw InvalidInput("config: top level must be an object");
    ScenarioConfig c;
    c.source = j;
    c.name = j.value("name", std::string());
    if (c.name.empty()) throw InvalidInput("name: missing");
    if (!j.contains("measure")) throw InvalidInput("measure: missing");
    c.measure_decl = j.at("measure");
    c.measure = parse_measure(c.measure_decl);

    if (!j.contains("degrees") || !j.at("degrees").is_array() || j.at("degrees").empty()) {
        throw InvalidInput("degrees: must be a nonempty array");
    }
    for (const auto& d : j.at("degrees")) {
        if (!d.is_number_integer() || d.get<long long>() < 1) throw InvalidInput("degrees: entries must be integers >= 1");
        c.degrees.push_back(d.get<std::size_t>());
    }
    for (std::size_t i = 1; i < c.degrees.size(); ++i) {
        if (c.degrees[i] <= c.degrees[i - 1]) throw InvalidInput("degrees: must be strictly increasing");
    }
    c.replicates = j.value("replicates", std::size_t{0});
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    if (!j.contains("tasks") || !j.at("tasks").is_array() || j.at("tasks").empty()) {
        throw InvalidInput("tasks: must be a nonempty array");
    }
    std::set<Task> seen;
    for (const auto& t : j.at("tasks")) {
        if (!t.is_string()) throw InvalidInput("tasks: entries must be strings");
        const Task task = parse_task(t.get<std::string>());
        if (!seen.insert(task).second) throw InvalidInput("tasks: '" + t.get<std::string>() + "' listed twice");
        c.tasks.push_back(task);
    }
    if (seen.count(Task::zero_mc) && c.replicates < 2) throw InvalidInput("replicates: zero_mc needs at least 2");
    c.output_dir = j.value("output_dir", std::string("out/") + c.name);
    c.t_grid = j.contains("t_grid") ? parse_t_grid(j.at("t_grid")) : parse_t_grid(Json::object());
    if (j.contains("eta")) c.eta = json_number(j.at("eta"), "eta");
    if (j.contains("gamma")) c.gamma = json_number(j.at("gamma"), "gamma");
    if (!(c.eta > 0.0)) throw InvalidInput("eta: must be > 0");
    if (!(c.gamma > 0.0)) throw InvalidInput("gamma: must be > 0");
    c.profile_points = j.value("profile_points", std::size_t{4096});
    c.max_lag = j.value("max_lag", std::size_t{8});
    c.dump_samples = j.value("dump_samples", false);
    if (j.contains("x0")) c.x0 = json_number(j.at("x0"), "x0");
    if (j.contains("localized")) {
        const auto& arr = j.at("localized");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "localized[" + std::to_string(i) + "]";
            LocalizedConfig lc;
            for (const auto& v : arr[i].at("t")) lc.t_points.push_back(json_number(v, p + ".t"));
            for (const auto& v : arr[i].at("lambda")) lc.lambdas.push_back(json_number(v, p + ".lambda"));
            if (lc.t_points.size() != lc.lambdas.size() || lc.t_points.empty()) {
                throw InvalidInput(p + ": t and lambda must be nonempty and of equal length");
            }
            c.localized.push_back(std::move(lc));
        }
    } else {
        c.localized = default_localized_configs();
    }
    if (j.contains("expect")) {
        const auto& e = j.at("expect");
        if (e.contains("limit")) c.expect.limit = json_number(e.at("limit"), "expect.limit");
        if (e.contains("tolerance")) c.expect.tolerance = json_number(e.at("tolerance"), "expect.tolerance");
    }
    return c;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline ScenarioConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace trigzero
