#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trigzero/config.hpp"
#include "trigzero/format.hpp"
#include "trigzero/kacrice.hpp"
#include "trigzero/parallel.hpp"
#include "trigzero/sampler.hpp"
#include "trigzero/spectral.hpp"
#include "trigzero/szclt.hpp"
#include "trigzero/zeros.hpp"

namespace trigzero {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int csv_schema_version = 1;

inline const std::map<std::string, std::string>& csv_schemas() {
    static const std::map<std::string, std::string> s{
        {"kacrice_sweep", "n,ratio,error_estimate,predicted_limit,gap"},
        {"integrand_profile", "x,integrand"},
        {"zero_mc", "scenario,n,replicate,seed,count,ratio,suspicious"},
        {"szclt", "t,re,im,kind,n"},
        {"samples", "k,a_k,b_k"},
        {"moments", "x,s0,s1,s2"},
    };
    return s;
}

/// JSON number, with non-finite values written as strings ("inf", "nan").
inline Json json_real(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline double json_real_value(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open output file " + path.string());
    out << j.dump(2) << '\n';
}

/// Closed-form E[N]/n for independent coefficients.
inline double independent_ratio(std::size_t n) {
    const double nn = static_cast<double>(n);
    return 2.0 / nn * std::sqrt((nn + 1.0) * (2.0 * nn + 1.0) / 6.0);
}

inline bool is_independent(const SpectralMeasure& m) {
    return m.atoms().empty() && m.density() && m.density()->kind() == DensityKind::uniform;
}

struct TaskRecord {
    Task task;
    std::string status = "ok";  // ok | failed
    std::string error;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
};

struct RunManifest {
    std::string scenario;
    std::string config_hash;
    std::string version = tool_version;
    std::vector<TaskRecord> tasks;
    std::filesystem::path directory;

    Json to_json() const {
        Json j;
        j["scenario"] = scenario;
        j["config_hash"] = config_hash;
        j["tool_version"] = version;
        j["csv_schema_version"] = csv_schema_version;
        j["csv_schemas"] = csv_schemas();
        j["tasks"] = Json::array();
        for (const auto& t : tasks) {
            Json r;
            r["task"] = to_string(t.task);
            r["status"] = t.status;
            if (!t.error.empty()) r["error"] = t.error;
            r["outputs"] = t.outputs;
            r["wall_seconds"] = t.wall_seconds;
            j["tasks"].push_back(r);
        }
        return j;
    }
};

inline std::string config_hash(const ScenarioConfig& c) { return hex64(fnv1a64(c.source.dump())); }

class ScenarioRunner {
public:
    explicit ScenarioRunner(ScenarioConfig cfg) : cfg_(std::move(cfg)), dir_(cfg_.output_dir) {}

    RunManifest run() {
        std::filesystem::create_directories(dir_);
        RunManifest man;
        man.scenario = cfg_.name;
        man.config_hash = config_hash(cfg_);
        man.directory = dir_;
        for (Task t : cfg_.tasks) {
            TaskRecord rec;
            rec.task = t;
            const auto start = std::chrono::steady_clock::now();
            try {
                rec.outputs = dispatch(t);
            } catch (const std::exception& e) {
                rec.status = "failed";
                rec.error = e.what();
            }
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            man.tasks.push_back(std::move(rec));
        }
        write_json_file(dir_ / "manifest.json", man.to_json());
        return man;
    }

private:
    std::vector<std::string> dispatch(Task t) {
        switch (t) {
            case Task::kacrice_sweep: return kacrice_sweep();
            case Task::zero_mc: return zero_mc();
            case Task::integrand_profile: return integrand_profile_task();
            case Task::szclt: return szclt_task();
            case Task::hypotheses: return hypotheses_task();
            case Task::covariance_check: return covariance_task();
        }
        return {};
    }

    const CorrelationSequence& rho(std::size_t n) {
        auto it = rho_.find(n);
        if (it == rho_.end()) it = rho_.emplace(n, correlation_of(cfg_.measure, n)).first;
        return it->second;
    }

    /// Kac-Rice ratios for all requested degrees, computed in parallel once.
    const KacRiceProfile& kacrice(std::size_t n) {
        if (!kr_.count(n)) {
            std::vector<std::size_t> todo;
            for (std::size_t d : cfg_.degrees) {
                if (!kr_.count(d)) todo.push_back(d);
            }
            if (std::find(todo.begin(), todo.end(), n) == todo.end()) todo.push_back(n);
            for (std::size_t d : todo) rho(d);
            std::vector<KacRiceProfile> res(todo.size());
            parallel_for(todo.size(), [&](std::size_t i) { res[i] = expected_zero_ratio(rho_.at(todo[i]), todo[i]); });
            for (std::size_t i = 0; i < todo.size(); ++i) kr_.emplace(todo[i], std::move(res[i]));
        }
        return kr_.at(n);
    }

    LimitPrediction prediction() const { return predicted_limit(cfg_.measure); }

    std::vector<std::string> kacrice_sweep() {
        const auto pred = prediction();
        CsvWriter csv((dir_ / "kacrice_sweep.csv").string(), {"n", "ratio", "error_estimate", "predicted_limit", "gap"});
        Json summary;
        summary["scenario"] = cfg_.name;
        summary["measure"] = cfg_.measure.describe();
        summary["regime"] = to_string(pred.regime);
        summary["predicted_limit"] = json_real(pred.limit);
        summary["nodal_measure"] = pred.nodal_measure;
        summary["adherence_interval"] = {pred.lower, pred.upper};
        summary["independent"] = is_independent(cfg_.measure);
        summary["rows"] = Json::array();
        for (std::size_t n : cfg_.degrees) {
            const auto& kr = kacrice(n);
            const double gap = kr.ratio - pred.limit;
            csv.row(n, kr.ratio, kr.quadrature_error_estimate, pred.limit, gap);
            Json r;
            r["n"] = n;
            r["ratio"] = kr.ratio;
            r["error_estimate"] = json_real(kr.quadrature_error_estimate);
            r["converged"] = kr.converged;
            r["predicted_limit"] = json_real(pred.limit);
            r["gap"] = json_real(gap);
            if (is_independent(cfg_.measure)) r["closed_form"] = independent_ratio(n);
            summary["rows"].push_back(r);
        }
        write_json_file(dir_ / "kacrice_summary.json", summary);
        return {"kacrice_sweep.csv", "kacrice_summary.json"};
    }

    std::vector<std::string> zero_mc() {
        const auto pred = prediction();
        std::vector<std::string> outputs{"zero_mc.csv", "zero_mc_summary.json"};
        CsvWriter csv((dir_ / "zero_mc.csv").string(), {"scenario", "n", "replicate", "seed", "count", "ratio", "suspicious"});
        Json summary = Json::array();
        for (std::size_t n : cfg_.degrees) {
            const CoefficientSampler sampler(cfg_.measure, n);
            const auto st = zero_statistics(sampler, cfg_.replicates, cfg_.master_seed);
            for (const auto& r : st.rows) csv.row(cfg_.name, n, r.replicate, r.seed, r.count, r.ratio, r.suspicious);
            const auto& kr = kacrice(n);
            Json s;
            s["n"] = n;
            s["replicates"] = st.replicates;
            s["mean_ratio"] = st.mean_ratio;
            s["se"] = st.se;
            s["kacrice_ratio"] = kr.ratio;
            s["predicted_limit"] = json_real(pred.limit);
            s["sampler"] = to_string(sampler.method());
            summary.push_back(s);
            if (cfg_.dump_samples) {
                std::filesystem::create_directories(dir_ / "samples");
                for (std::size_t r = 0; r < cfg_.replicates; ++r) {
                    const auto smp = sampler.sample(cfg_.master_seed, r);
                    const std::string name = "samples/n" + std::to_string(n) + "_rep" + std::to_string(r) + ".csv";
                    CsvWriter out((dir_ / name).string(), {"k", "a_k", "b_k"});
                    for (std::size_t k = 0; k < n; ++k) out.row(k + 1, smp.a[k], smp.b[k]);
                    outputs.push_back(name);
                }
            }
        }
        write_json_file(dir_ / "zero_mc_summary.json", summary);
        return outputs;
    }

    std::vector<std::string> integrand_profile_task() {
        std::vector<std::string> outputs;
        for (std::size_t n : cfg_.degrees) {
            const std::size_t m = std::max(next_power_of_two(cfg_.profile_points), next_power_of_two(2 * n + 2));
            const auto prof = integrand_profile(rho(n), n, m);
            const std::string name = "integrand_n" + std::to_string(n) + ".csv";
            CsvWriter csv((dir_ / name).string(), {"x", "integrand"});
            for (std::size_t i = 0; i < prof.grid.size(); ++i) csv.row(prof.grid[i], prof.integrand[i]);
            outputs.push_back(name);
        }
        return outputs;
    }

    std::vector<std::string> szclt_task() {
        CsvWriter csv((dir_ / "szclt_cf.csv").string(), {"t", "re", "im", "kind", "n"});
        const auto& density = cfg_.measure.density();
        std::optional<CharFunctionCurve> limit;
        if (density) limit = limit_cf(*density, cfg_.t_grid);
        auto dump = [&](const CharFunctionCurve& c, std::size_t n) {
            for (std::size_t j = 0; j < c.t.size(); ++j) {
                csv.row(c.t[j], c.values[j].real(), c.values[j].imag(), to_string(c.kind), n);
            }
        };
        Json summary;
        summary["scenario"] = cfg_.name;
        summary["has_density"] = density.has_value();
        summary["has_atoms"] = !cfg_.measure.atoms().empty();
        summary["curves"] = Json::array();
        summary["localized"] = Json::array();
        for (std::size_t n : cfg_.degrees) {
            const auto sample = sample_coefficients(cfg_.measure, n, cfg_.master_seed, 0);
            const auto emp = empirical_cf(sample, cfg_.t_grid);
            const auto cond = conditional_cf(rho(n), n, cfg_.t_grid);
            dump(emp, n);
            dump(cond, n);
            Json r;
            r["n"] = n;
            r["emp_cond"] = cf_distance(emp, cond);
            if (limit) {
                dump(*limit, n);
                r["emp_limit"] = cf_distance(emp, *limit);
                r["cond_limit"] = cf_distance(cond, *limit);
                r["triangle_holds"] = r["emp_limit"].get<double>() <=
                                      r["emp_cond"].get<double>() + r["cond_limit"].get<double>() + 1e-12;
            }
            summary["curves"].push_back(r);
            for (const auto& lc : cfg_.localized) {
                const auto chk = localized_variance(rho(n), cfg_.measure, n, cfg_.x0, lc.t_points, lc.lambdas);
                Json l;
                l["n"] = n;
                l["X0"] = chk.x0;
                l["t_points"] = chk.t_points;
                l["lambdas"] = chk.lambdas;
                l["variance_n"] = chk.variance_n;
                l["variance_limit"] = chk.variance_limit ? Json(*chk.variance_limit) : Json(nullptr);
                const auto gap = chk.relative_gap();
                l["rel_gap"] = gap ? Json(*gap) : Json(nullptr);
                summary["localized"].push_back(l);
            }
        }
        write_json_file(dir_ / "szclt_summary.json", summary);
        return {"szclt_cf.csv", "szclt_summary.json"};
    }

    std::vector<std::string> hypotheses_task() {
        const auto rep = hypothesis_report(cfg_.measure, cfg_.eta, cfg_.gamma);
        const auto psd = validate_psd(rho(cfg_.degrees.back()));
        Json j;
        j["scenario"] = cfg_.name;
        j["eta"] = cfg_.eta;
        j["gamma"] = cfg_.gamma;
        j["nodal_measure"] = rep.nodal_measure;
        j["log_norm"] = json_real(rep.log_norm);
        j["neg_moment"] = json_real(rep.neg_moment);
        j["besov_exponent_estimate"] = rep.besov_exponent_estimate;
        j["applicable"] = Json::array();
        for (auto law : rep.applicable_laws) j["applicable"].push_back(to_string(law));
        j["psd"] = {{"passed", psd.passed},
                    {"fejer_min", psd.fejer_min},
                    {"toeplitz_min_eigenvalue", psd.toeplitz_min_eigenvalue},
                    {"toeplitz_order", psd.toeplitz_order}};
        j["regime"] = to_string(prediction().regime);
        write_json_file(dir_ / "hypotheses.json", j);
        return {"hypotheses.json"};
    }

    std::vector<std::string> covariance_task() {
        const std::size_t n = cfg_.degrees.back();
        const std::size_t count = std::max(cfg_.replicates, covariance_check_min_samples);
        const std::size_t max_lag = std::min(cfg_.max_lag, n - 1);
        const CoefficientSampler sampler(cfg_.measure, n);
        const auto samples = sample_replicates(sampler, cfg_.master_seed, count);
        const auto rep = covariance_check(samples, rho(n), max_lag);
        const auto cross = cross_covariance_check(samples, max_lag);
        Json j;
        j["scenario"] = cfg_.name;
        j["n"] = n;
        j["samples"] = count;
        j["sampler"] = to_string(sampler.method());
        j["pass"] = rep.pass;
        j["cross_pass"] = cross.pass;
        j["lags"] = Json::array();
        for (std::size_t k = 0; k <= max_lag; ++k) {
            j["lags"].push_back({{"k", k},
                                 {"reference", rep.reference[k]},
                                 {"estimate", rep.estimate[k]},
                                 {"se", rep.standard_error[k]},
                                 {"pass", static_cast<bool>(rep.lag_pass[k])}});
        }
        write_json_file(dir_ / "covariance_check.json", j);
        return {"covariance_check.json"};
    }

    ScenarioConfig cfg_;
    std::filesystem::path dir_;
    std::map<std::size_t, CorrelationSequence> rho_;
    std::map<std::size_t, KacRiceProfile> kr_;
};

inline RunManifest run_scenario(const ScenarioConfig& cfg) { return ScenarioRunner(cfg).run(); }

// ---------------------------------------------------------------------------
// Verdicts

enum class Verdict { pass, fail, incomplete, info };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::incomplete: return "incomplete";
        case Verdict::info: return "info";
    }
    return "unknown";
}

struct VerdictRow {
    std::string scenario;
    std::string check;
    std::string expected;
    std::string observed;
    Verdict verdict = Verdict::info;
};

inline constexpr double non_universal_tolerance = 0.03;
inline constexpr double universal_tolerance = 0.02;
inline constexpr double independent_tolerance = 1e-6;
inline constexpr double atomic_band_low = 1.35;
inline constexpr double atomic_band_high = 2.05;
inline constexpr double atomic_min_spread = 0.1;
inline constexpr double mc_sigmas = 3.0;
inline constexpr double localized_tolerance = 0.05;

struct VerdictTable {
    std::vector<VerdictRow> rows;

    bool ok() const {
        return std::none_of(rows.begin(), rows.end(), [](const VerdictRow& r) {
            return r.verdict == Verdict::fail || r.verdict == Verdict::incomplete;
        });
    }

    std::string render() const {
        std::ostringstream os;
        std::size_t w0 = 8, w1 = 5, w2 = 8, w3 = 8;
        for (const auto& r : rows) {
            w0 = std::max(w0, r.scenario.size());
            w1 = std::max(w1, r.check.size());
            w2 = std::max(w2, r.expected.size());
            w3 = std::max(w3, r.observed.size());
        }
        auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
        os << pad("scenario", w0) << "  " << pad("check", w1) << "  " << pad("expected", w2) << "  "
           << pad("observed", w3) << "  verdict\n";
        for (const auto& r : rows) {
            os << pad(r.scenario, w0) << "  " << pad(r.check, w1) << "  " << pad(r.expected, w2) << "  "
               << pad(r.observed, w3) << "  " << to_string(r.verdict) << '\n';
        }
        return os.str();
    }
};

namespace detail {

inline std::string fixed(double v, int digits = 6) {
    if (!std::isfinite(v)) return format_double(v);
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

inline Verdict judge(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

class ReportBuilder {
public:
    ReportBuilder(const Json& manifest, std::filesystem::path dir, const ScenarioConfig* cfg)
        : man_(manifest), dir_(std::move(dir)), cfg_(cfg) {
        scenario_ = man_.value("scenario", std::string("?"));
    }

    VerdictTable build() {
        for (const auto& t : man_.at("tasks")) {
            const auto task = t.value("task", std::string());
            if (t.value("status", std::string()) != "ok") {
                add(task, "completed", t.value("error", std::string("failed")), Verdict::fail);
                continue;
            }
            bool missing = false;
            for (const auto& f : t.value("outputs", Json::array())) {
                if (!std::filesystem::exists(dir_ / f.get<std::string>())) missing = true;
            }
            if (missing) {
                add(task, "outputs present", "missing", Verdict::incomplete);
                continue;
            }
            try {
                if (task == "kacrice_sweep") kacrice(read_json_file((dir_ / "kacrice_summary.json").string()));
                if (task == "zero_mc") zero_mc(read_json_file((dir_ / "zero_mc_summary.json").string()));
                if (task == "szclt") szclt(read_json_file((dir_ / "szclt_summary.json").string()));
                if (task == "hypotheses") hypotheses(read_json_file((dir_ / "hypotheses.json").string()));
                if (task == "covariance_check") covariance(read_json_file((dir_ / "covariance_check.json").string()));
                if (task == "integrand_profile") {
                    add("integrand_profile", "files written", std::to_string(t.at("outputs").size()), Verdict::info);
                }
            } catch (const std::exception& e) {
                add(task, "summary readable", e.what(), Verdict::incomplete);
            }
        }
        if (cfg_) {
            for (Task t : cfg_->tasks) {
                const auto name = to_string(t);
                const bool found = std::any_of(man_.at("tasks").begin(), man_.at("tasks").end(),
                                               [&](const Json& r) { return r.value("task", std::string()) == name; });
                if (!found) add(name, "listed in manifest", "absent", Verdict::incomplete);
            }
        }
        return std::move(table_);
    }

private:
    void add(std::string check, std::string expected, std::string observed, Verdict v) {
        table_.rows.push_back({scenario_, std::move(check), std::move(expected), std::move(observed), v});
    }

    std::optional<double> override_limit() const {
        if (cfg_ && cfg_->expect.limit) return cfg_->expect.limit;
        return std::nullopt;
    }

    void kacrice(const Json& s) {
        const auto& rows = s.at("rows");
        if (rows.empty()) {
            add("kacrice", "rows", "none", Verdict::incomplete);
            return;
        }
        const auto regime = s.value("regime", std::string());
        if (s.value("independent", false)) {
            for (const auto& r : rows) {
                const double exact = r.at("closed_form").get<double>();
                const double ratio = r.at("ratio").get<double>();
                add("kacrice exact n=" + std::to_string(r.at("n").get<std::size_t>()),
                    fixed(exact, 8) + " +- 1e-6", fixed(ratio, 8), judge(std::abs(ratio - exact) < independent_tolerance));
            }
        }
        if (regime == "atomic_nonconvergent") {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& r : rows) {
                const double v = r.at("ratio").get<double>();
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            add("kacrice ratios in band", "[1.35, 2.05]", "[" + fixed(lo) + ", " + fixed(hi) + "]",
                judge(lo >= atomic_band_low && hi <= atomic_band_high));
            if (rows.size() >= 2) {
                add("kacrice spread", ">= 0.1", fixed(hi - lo), judge(hi - lo >= atomic_min_spread));
            }
            return;
        }
        const double limit = override_limit().value_or(json_real_value(s.at("predicted_limit")));
        const double tol = cfg_ && cfg_->expect.tolerance ? *cfg_->expect.tolerance
                           : regime == "non_universal"    ? non_universal_tolerance
                                                          : universal_tolerance;
        const auto& last = rows.back();
        const double ratio = last.at("ratio").get<double>();
        add("kacrice limit n=" + std::to_string(last.at("n").get<std::size_t>()),
            fixed(limit) + " +- " + format_double(tol), fixed(ratio), judge(std::abs(ratio - limit) < tol));
        if (regime == "non_universal" && rows.size() >= 2) {
            const double g0 = std::abs(rows.front().at("ratio").get<double>() - limit);
            const double g1 = std::abs(ratio - limit);
            add("kacrice gap shrinks", "< " + fixed(g0), fixed(g1), judge(g1 < g0));
        }
    }

    void zero_mc(const Json& s) {
        for (const auto& r : s) {
            const double mean = r.at("mean_ratio").get<double>();
            const double se = r.at("se").get<double>();
            const double kr = r.at("kacrice_ratio").get<double>();
            add("mc mean n=" + std::to_string(r.at("n").get<std::size_t>()),
                fixed(kr) + " +- 3 SE", fixed(mean) + " (SE " + fixed(se) + ")",
                judge(std::abs(mean - kr) <= mc_sigmas * se));
        }
    }

    void szclt(const Json& s) {
        const auto& curves = s.at("curves");
        if (s.value("has_density", false)) {
            for (const auto& c : curves) {
                add("cf triangle n=" + std::to_string(c.at("n").get<std::size_t>()), "holds",
                    c.at("triangle_holds").get<bool>() ? "holds" : "violated", judge(c.at("triangle_holds").get<bool>()));
            }
            if (curves.size() >= 2) {
                const double d0 = curves.front().at("cond_limit").get<double>();
                const double d1 = curves.back().at("cond_limit").get<double>();
                // equal curves at every n (independent case) leave only quadrature noise
                const double noise = 10 * limit_cf_tolerance;
                if (d0 < noise && d1 < noise) {
                    add("cf conditional->limit", "< " + format_double(noise), format_double(d1), Verdict::pass);
                } else {
                    add("cf conditional->limit shrinks", "< " + fixed(d0), fixed(d1), judge(d1 < d0));
                }
                const double e0 = curves.front().at("emp_limit").get<double>();
                const double e1 = curves.back().at("emp_limit").get<double>();
                add("cf empirical->limit", "< " + fixed(e0), fixed(e1), Verdict::info);
            }
        }
        std::map<std::string, std::vector<const Json*>> by_config;
        for (const auto& l : s.at("localized")) by_config[l.at("t_points").dump() + l.at("lambdas").dump()].push_back(&l);
        for (const auto& [key, entries] : by_config) {
            const auto& last = *entries.back();
            if (last.at("rel_gap").is_null()) {
                add("localized " + key, "limit available", "none", Verdict::info);
                continue;
            }
            const double g1 = last.at("rel_gap").get<double>();
            bool ok = g1 < localized_tolerance;
            std::string expected = "< 0.05";
            if (entries.size() >= 2) {
                const double g0 = entries.front()->at("rel_gap").get<double>();
                ok = ok && g1 < g0;
                expected += " and < " + fixed(g0);
            }
            add("localized " + key, expected, fixed(g1), judge(ok));
        }
    }

    void hypotheses(const Json& h) {
        std::string laws;
        for (const auto& l : h.at("applicable")) laws += (laws.empty() ? "" : "+") + l.get<std::string>();
        add("hypotheses", "report", laws.empty() ? "none" : laws, Verdict::info);
        add("psd", "passed", h.at("psd").at("passed").get<bool>() ? "passed" : "failed",
            judge(h.at("psd").at("passed").get<bool>()));
    }

    void covariance(const Json& c) {
        add("covariance", "within 4 SE", c.at("pass").get<bool>() ? "yes" : "no", judge(c.at("pass").get<bool>()));
        add("a/b cross covariance", "within 4 SE", c.at("cross_pass").get<bool>() ? "yes" : "no",
            judge(c.at("cross_pass").get<bool>()));
    }

    const Json& man_;
    std::filesystem::path dir_;
    const ScenarioConfig* cfg_;
    std::string scenario_;
    VerdictTable table_;
};

}  // namespace detail

/// Verdicts for a finished run. `cfg` adds the completeness check against the
/// declared tasks and any expectation overrides.
inline VerdictTable compare_report(const std::filesystem::path& manifest_path, const ScenarioConfig* cfg = nullptr) {
    if (!std::filesystem::exists(manifest_path)) {
        VerdictTable t;
        t.rows.push_back({cfg ? cfg->name : std::string("?"), "manifest", "present", "missing", Verdict::incomplete});
        return t;
    }
    const auto man = read_json_file(manifest_path.string());
    return detail::ReportBuilder(man, manifest_path.parent_path(), cfg).build();
}

}  // namespace trigzero
