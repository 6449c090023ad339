#include "fracks/cli.hpp"

#include "fracks/errors.hpp"
#include "fracks/oracle_table.hpp"
#include "fracks/specfun.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fracks {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.141592653589793;

struct ExperimentInfo {
    Experiment id;
    const char* name;
    const char* module;
};

constexpr ExperimentInfo kExperiments[] = {
    {Experiment::ml_eval, "ml-eval", "specfun"},
    {Experiment::mainardi_moments, "mainardi-moments", "specfun"},
    {Experiment::decay_heat, "decay-heat", "estimates"},
    {Experiment::decay_ml, "decay-ml", "estimates"},
    {Experiment::yamazaki, "yamazaki", "estimates"},
    {Experiment::product, "product", "besov"},
    {Experiment::bilinear, "bilinear", "estimates"},
    {Experiment::linear_op, "linear-op", "estimates"},
    {Experiment::solve, "solve", "wellposed"},
    {Experiment::selfsim, "selfsim", "wellposed"},
    {Experiment::uniqueness, "uniqueness", "wellposed"},
};

const ExperimentInfo& info(Experiment e) {
    for (const auto& x : kExperiments)
        if (x.id == e) return x;
    return kExperiments[0];
}

bool needs_model_window(Experiment e) {
    switch (e) {
        case Experiment::product:
        case Experiment::bilinear:
        case Experiment::linear_op:
        case Experiment::solve:
        case Experiment::selfsim:
        case Experiment::uniqueness: return true;
        default: return false;
    }
}

// ---------------------------------------------------------------------------
// Value parsing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
    std::string v = trim(raw);
    double factor = 1.0;
    // lengths may be given as multiples of pi: "64pi", "64*pi", "pi"
    if (v.size() >= 2 && v.compare(v.size() - 2, 2, "pi") == 0) {
        factor = kPi;
        v = trim(v.substr(0, v.size() - 2));
        if (!v.empty() && v.back() == '*') v = trim(v.substr(0, v.size() - 1));
        if (v.empty()) return kPi;
    }
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity() * factor;
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(key + ": expected a number, got '" + raw + "'");
    return x * factor;
}

long parse_long(const std::string& key, const std::string& raw) {
    const double x = parse_double(key, raw);
    if (x != std::floor(x) || std::abs(x) > 1e15) throw ConfigError(key + ": expected an integer, got '" + raw + "'");
    return static_cast<long>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(raw);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty() && item.front() == '[') item = trim(item.substr(1));
        if (!item.empty() && item.back() == ']') item = trim(item.substr(0, item.size() - 1));
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

Setter dbl(double RunConfig::*m) {
    return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_double(k, v); };
}
template <class Sub>
Setter sub_dbl(Sub RunConfig::*s, double Sub::*m) {
    return [s, m](RunConfig& c, const std::string& k, const std::string& v) { (c.*s).*m = parse_double(k, v); };
}
template <class T>
Setter integer(T RunConfig::*m, long lo) {
    return [m, lo](RunConfig& c, const std::string& k, const std::string& v) {
        const long x = parse_long(k, v);
        if (x < lo) throw ConfigError(k + ": must be at least " + std::to_string(lo));
        c.*m = static_cast<T>(x);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["model.alpha"] = sub_dbl(&RunConfig::model, &ModelParams::alpha);
        t["model.theta"] = sub_dbl(&RunConfig::model, &ModelParams::theta);
        t["model.theta1"] = sub_dbl(&RunConfig::model, &ModelParams::theta1);
        t["model.gamma"] = sub_dbl(&RunConfig::model, &ModelParams::gamma);
        t["model.chi"] = sub_dbl(&RunConfig::model, &ModelParams::chi);
        t["model.kappa"] = sub_dbl(&RunConfig::model, &ModelParams::kappa);
        t["model.D_eta"] = sub_dbl(&RunConfig::model, &ModelParams::D_eta);
        t["model.D_v"] = sub_dbl(&RunConfig::model, &ModelParams::D_v);
        t["model.gamma_sign"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            try {
                c.model.gamma_sign = parse_gamma_sign(trim(v));
            } catch (const std::exception& e) {
                throw ConfigError(k + ": " + e.what());
            }
        };
        t["grid.dim"] = integer(&RunConfig::dim, 1);
        t["grid.n"] = integer(&RunConfig::n, 8);
        t["grid.half_width"] = dbl(&RunConfig::half_width);
        t["mesh.t_final"] = dbl(&RunConfig::t_final);
        t["mesh.steps"] = integer(&RunConfig::steps, 1);
        t["mesh.grading"] = dbl(&RunConfig::grading);
        t["besov.p"] = dbl(&RunConfig::p);
        t["besov.q"] = dbl(&RunConfig::q);
        for (const char* k : {"besov.s1", "besov.s2", "besov.r"})
            t[k] = [](RunConfig&, const std::string& key, const std::string&) {
                throw ConfigError(key + " is derived from the model and cannot be set");
            };
        t["iteration.tol_rel"] = sub_dbl(&RunConfig::iteration, &IterationConfig::tol_rel);
        t["iteration.max_iters"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const long x = parse_long(k, v);
            if (x < 1) throw ConfigError(k + ": must be at least 1");
            c.iteration.max_iters = static_cast<std::size_t>(x);
        };
        t["iteration.starts"] = integer(&RunConfig::starts, 1);
        t["data.kind"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const std::string s = trim(v);
            if (s != "zero" && s != "band" && s != "homogeneous")
                throw ConfigError(k + ": expected zero, band or homogeneous, got '" + v + "'");
            c.data_kind = s;
        };
        t["data.amplitude"] = dbl(&RunConfig::amplitude);
        t["data.kmax"] = integer(&RunConfig::data_kmax, 0);
        t["decay.family"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const std::string s = trim(v);
            if (s == "heat") c.decay_family = DecayFamily::heat;
            else if (s == "E_alpha") c.decay_family = DecayFamily::E_alpha;
            else if (s == "E_alpha_alpha") c.decay_family = DecayFamily::E_alpha_alpha;
            else throw ConfigError(k + ": expected heat, E_alpha or E_alpha_alpha, got '" + v + "'");
        };
        t["decay.zeta"] = sub_dbl(&RunConfig::decay, &DecaySpec::zeta);
        t["decay.s1"] = sub_dbl(&RunConfig::decay, &DecaySpec::s1);
        t["decay.s2"] = sub_dbl(&RunConfig::decay, &DecaySpec::s2);
        t["decay.p1"] = sub_dbl(&RunConfig::decay, &DecaySpec::p1);
        t["decay.p2"] = sub_dbl(&RunConfig::decay, &DecaySpec::p2);
        t["decay.tolerance"] = sub_dbl(&RunConfig::decay, &DecaySpec::tolerance);
        t["decay.t_min"] = dbl(&RunConfig::decay_t_min);
        t["decay.t_max"] = dbl(&RunConfig::decay_t_max);
        t["decay.per_decade"] = integer(&RunConfig::decay_per_decade, 1);
        t["ensemble.members"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const long x = parse_long(k, v);
            if (x < 1) throw ConfigError(k + ": must be at least 1");
            c.ensemble.members = static_cast<std::size_t>(x);
        };
        t["ensemble.kmax"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.kmax = static_cast<int>(parse_long(k, v));
        };
        t["ensemble.extra_decay"] = sub_dbl(&RunConfig::ensemble, &EnsembleSpec::extra_decay);
        t["ensemble.T"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.T_values = parse_list(k, v); };
        t["selfsim.sigma"] = dbl(&RunConfig::sigma);
        t["selfsim.levels"] = integer(&RunConfig::levels, 2);
        t["selfsim.t_from"] = dbl(&RunConfig::t_from);
        t["yamazaki.zeta"] = sub_dbl(&RunConfig::yamazaki, &YamazakiParams::zeta);
        t["yamazaki.s"] = sub_dbl(&RunConfig::yamazaki, &YamazakiParams::s);
        t["yamazaki.p"] = sub_dbl(&RunConfig::yamazaki, &YamazakiParams::p);
        t["yamazaki.s0"] = [](RunConfig&, const std::string& key, const std::string&) {
            throw ConfigError(key + " is derived (s0 = s - theta + zeta) and cannot be set");
        };
        t["yamazaki.t_final"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.yamazaki_t_final = parse_list(k, v);
        };
        t["yamazaki.kmax"] = integer(&RunConfig::yamazaki_kmax, 0);
        t["oracle.path"] = [](RunConfig& c, const std::string&, const std::string& v) { c.oracle_path = trim(v); };
        t["run.output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); };
        t["run.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const long x = parse_long(k, v);
            if (x < 0) throw ConfigError(k + ": must be nonnegative");
            c.seed = static_cast<std::uint64_t>(x);
        };
        return t;
    }();
    return table;
}

std::map<std::string, std::string> flatten_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON syntax: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("JSON config must be an object of sections");
    std::map<std::string, std::string> out;
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            std::string s;
            if (value.is_string()) s = value.get<std::string>();
            else if (value.is_array()) {
                for (const auto& x : value) s += (s.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
            } else s = value.dump();
            out[section + "." + key] = s;
        }
    }
    return out;
}

std::map<std::string, std::string> flatten_ini(const std::string& text) {
    // '#' comments become ';' comments so line numbers survive
    std::ostringstream cleaned;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        cleaned << (!t.empty() && t[0] == '#' ? ";" : line) << '\n';
    }
    boost::property_tree::ptree pt;
    std::istringstream is(cleaned.str());
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(e.message(), static_cast<int>(e.line()));
    }
    std::map<std::string, std::string> out;
    for (const auto& [section, body] : pt) {
        if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
        for (const auto& [key, value] : body) out[section + "." + key] = value.data();
    }
    return out;
}

}  // namespace

const char* to_string(Experiment e) { return info(e).name; }

Experiment parse_experiment(const std::string& name) {
    for (const auto& x : kExperiments)
        if (name == x.name) return x.id;
    std::string all;
    for (const auto& x : kExperiments) all += std::string(all.empty() ? "" : ", ") + x.name;
    throw ConfigError("unknown experiment '" + name + "' (expected one of " + all + ")");
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> v;
    for (const auto& x : kExperiments) v.emplace_back(x.name);
    return v;
}

TimeMesh RunConfig::mesh() const {
    double g = grading;
    if (g == 0.0) g = experiment == Experiment::selfsim ? model.theta / model.alpha : 2.0 / model.alpha;
    return TimeMesh(t_final, steps, g);
}

void RunConfig::finalize() {
    std::vector<std::string> issues;
    auto collect = [&](const std::function<void()>& check) {
        try {
            check();
        } catch (const std::exception& e) {
            if (std::find(issues.begin(), issues.end(), e.what()) == issues.end()) issues.emplace_back(e.what());
        }
    };
    collect([&] { (void)grid(); });
    collect([&] { model.validate(dim); });
    if (!(t_final > 0.0)) issues.emplace_back("mesh: t_final > 0 violated");
    if (grading != 0.0 && !(grading >= 1.0)) issues.emplace_back("mesh: grading >= 1 violated");
    if (needs_model_window(experiment)) {
        const std::string w = model.window_violation(dim, p);
        if (!w.empty()) issues.push_back(w);
        ProductParams pp;
        pp.p = p;
        pp.q = q;
        pp.theta = model.theta;
        pp.theta1 = model.theta1;
        try {
            pp.check(dim);
        } catch (const std::exception& e) {
            const std::string m = e.what();
            if (w.empty() || m.find(w) == std::string::npos) issues.push_back(m);
        }
    }
    if (experiment == Experiment::decay_heat) collect([&] { decay.validate(dim, DecayFamily::heat); });
    if (experiment == Experiment::decay_ml) {
        if (decay_family == DecayFamily::heat) issues.emplace_back("decay-ml: family must be E_alpha or E_alpha_alpha");
        else collect([&] { decay.validate(dim, decay_family); });
    }
    if (experiment == Experiment::yamazaki) {
        yamazaki.theta = model.theta;
        yamazaki.alpha = model.alpha;
        yamazaki.s0 = yamazaki.s - yamazaki.theta + yamazaki.zeta;
        collect([&] { yamazaki.check(); });
    }
    if (experiment == Experiment::selfsim) {
        if (model.gamma != 0.0) issues.emplace_back("selfsim: gamma = 0 required for the scaling");
        if (!(sigma >= 1.0 && sigma == std::floor(sigma))) issues.emplace_back("selfsim: sigma must be a positive integer");
    }
    if (!issues.empty()) {
        std::string msg = "hypotheses violated: ";
        for (std::size_t i = 0; i < issues.size(); ++i) msg += (i ? "; " : "") + issues[i];
        throw ConfigError(msg);
    }
    const double tol = iteration.tol_rel;
    const std::size_t iters = iteration.max_iters;
    iteration = IterationConfig::for_model(model, dim, p, q);
    iteration.tol_rel = tol;
    iteration.max_iters = iters;
    ensemble.seed = seed;
    decay.theta = model.theta;
    decay.alpha = model.alpha;
    decay.gamma = model.gamma;
    decay.gamma_sign = model.gamma_sign;
    collect([&] { iteration.validate(); });
    if (!issues.empty()) throw ConfigError(issues.front());
}

RunConfig parse_config_text(const std::string& text, Experiment experiment, bool json) {
    const auto kv = json ? flatten_json(text) : flatten_ini(text);
    RunConfig c;
    c.experiment = experiment;
    const auto& table = setters();
    for (const auto& [key, value] : kv) {
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
        it->second(c, key, value);
    }
    c.finalize();
    return c;
}

RunConfig load_config(const std::string& path, Experiment experiment) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const bool json = fs::path(path).extension() == ".json";
    return parse_config_text(ss.str(), experiment, json);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace {

struct Artifacts {
    fs::path dir;
    std::vector<std::string> files;

    explicit Artifacts(const fs::path& d) : dir(d) { fs::create_directories(dir); }
    std::ofstream open(const std::string& name) {
        files.push_back(name);
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        return os;
    }
};

RatioReport make(const std::string& id, const RunConfig& c, nlohmann::json params, double measured,
                 double predicted, double rel_dev, bool pass, const std::string& grid = "") {
    RatioReport r;
    r.check_id = id;
    r.params_json = params.dump();
    r.measured = measured;
    r.predicted = predicted;
    r.rel_dev = rel_dev;
    r.seed = c.seed;
    r.grid = grid;
    r.verdict = pass ? Verdict::pass : Verdict::fail;
    return r;
}

nlohmann::json model_json(const ModelParams& m) {
    return {{"alpha", m.alpha}, {"theta", m.theta}, {"theta1", m.theta1}, {"gamma", m.gamma},
            {"chi", m.chi},     {"kappa", m.kappa}, {"D_eta", m.D_eta},   {"D_v", m.D_v},
            {"gamma_sign", to_string(m.gamma_sign)}};
}

std::vector<RatioReport> run_ml_eval(const RunConfig& c) {
    const auto rows = c.oracle_path.empty() ? load_ml_oracle() : load_ml_oracle(c.oracle_path);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(ml_value(r.alpha, r.beta, r.x) - r.value));
    return {make("ml-oracle", c, {{"rows", rows.size()}, {"tolerance", 1e-10}}, worst, 0.0, worst,
                 worst <= 1e-10 && rows.size() >= 200)};
}

std::vector<RatioReport> run_mainardi(const RunConfig& c) {
    std::vector<RatioReport> out;
    double worst = 0.0;
    int combos = 0;
    for (double a : {0.25, 0.5, 0.75, 0.9})
        for (double r : {1.0, 2.5}) {
            const double want = std::tgamma(r + 1) / std::tgamma(a * r + 1);
            worst = std::max(worst, std::abs(mainardi_moment(a, r) / want - 1.0));
            ++combos;
        }
    out.push_back(make("mainardi-moment", c, {{"combinations", combos}, {"tolerance", 1e-8}}, worst, 0.0, worst,
                       worst <= 1e-8));
    // E_alpha(-lambda) = int M e^{-lambda t}, E_{alpha,alpha}(-lambda) = alpha int t M e^{-lambda t}
    double rep = 0.0;
    for (double a : {0.4, 0.7})
        for (double lam : {0.1, 1.0, 10.0}) {
            const double e1 = mainardi_integral(a, [&](double t) { return std::exp(-lam * t); });
            const double e2 = a * mainardi_integral(a, [&](double t) { return t * std::exp(-lam * t); });
            rep = std::max({rep, std::abs(e1 - ml_value(a, 1.0, lam)), std::abs(e2 - ml_value(a, a, lam))});
        }
    out.push_back(make("mainardi-representation", c, {{"alpha", {0.4, 0.7}}, {"lambda", {0.1, 1, 10}}}, rep, 0.0,
                       rep, rep <= 1e-8));
    return out;
}

std::vector<RatioReport> run_decay(const RunConfig& c, Artifacts& art) {
    const Grid grid = c.grid();
    const SpectralField f = decay_data(grid, c.decay.s1, c.decay.p1);
    DecaySpec spec = c.decay;
    spec.times = DecaySpec::log_times(c.decay_t_min, c.decay_t_max, c.decay_per_decade);
    const DecayFamily fam = c.experiment == Experiment::decay_heat ? DecayFamily::heat : c.decay_family;
    std::vector<GammaSign> signs{spec.gamma_sign};
    if (spec.gamma != 0.0) signs = {GammaSign::damped, GammaSign::paper};
    std::vector<RatioReport> out;
    for (GammaSign sign : signs) {
        spec.gamma_sign = sign;
        const std::string tag = std::string(to_string(fam)) + (spec.gamma != 0.0 ? std::string("-") + to_string(sign) : "");
        try {
            DecayFit fit = fam == DecayFamily::heat ? decay_fit_heat(f, spec) : decay_fit_ml(f, spec, fam);
            fit.report.seed = c.seed;
            auto os = art.open("decay-" + tag + ".svg");
            write_decay_svg(os, fit);
            auto cs = art.open("decay-" + tag + ".csv");
            cs << "t,norm,top_shell\n" << std::setprecision(12);
            for (std::size_t i = 0; i < fit.t.size(); ++i) cs << fit.t[i] << ',' << fit.norm[i] << ',' << fit.top_shell[i] << '\n';
            out.push_back(fit.report);
        } catch (const RangeError& e) {
            RatioReport r = make(fam == DecayFamily::heat ? "decay-heat" : std::string("decay-ml-") + to_string(fam), c,
                                 {{"family", to_string(fam)}, {"gamma_sign", to_string(sign)}, {"note", e.what()}},
                                 kNaN, spec.predicted_slope(grid.dim(), fam), kNaN, false, grid_tag(grid));
            r.verdict = Verdict::inconclusive;
            out.push_back(r);
        }
    }
    return out;
}

// seeded Gaussian coefficients with equal weight on every |k_i| <= kmax
SpectralField flat_band(const Grid& g, int kmax, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField f(g);
    for (std::size_t i = 1; i < f.size(); ++i) {
        const auto k = g.wavevector(i);
        bool keep = true;
        for (int a = 0; a < g.dim(); ++a) keep = keep && std::abs(k[a]) <= kmax;
        if (keep) f[i] = cplx(nd(rng), nd(rng));
    }
    return hermitian_part(f);
}

std::vector<RatioReport> run_yamazaki(const RunConfig& c) {
    const Grid grid = c.grid();
    const DyadicCutoff cutoff(grid);
    const SpectralField f = flat_band(grid, c.yamazaki_kmax > 0 ? c.yamazaki_kmax : grid.n() / 4, c.seed);
    const YamazakiStudy ys = yamazaki_study(f, c.yamazaki, cutoff, c.yamazaki_t_final);
    nlohmann::json j = {{"alpha", c.yamazaki.alpha}, {"theta", c.yamazaki.theta}, {"zeta", c.yamazaki.zeta},
                        {"s", c.yamazaki.s},         {"s0", c.yamazaki.s0},       {"p", c.yamazaki.p},
                        {"t_final", ys.t_final},     {"ratio", ys.ratio},         {"tail_exponent", ys.tail_exponent}};
    RatioReport r = make("yamazaki", c, j, ys.ratio.back(), kNaN, ys.last_change, ys.converging, grid_tag(grid));
    return {r};
}

struct Ensemble {
    std::vector<SpectralField> a, b;
};

Ensemble build_ensemble(const Grid& g, const EnsembleSpec& es, double sa, double sb) {
    Ensemble e;
    for (std::size_t m = 0; m < es.members; ++m) {
        e.a.push_back(ensemble_member(g, es, sa, m, 0));
        e.b.push_back(ensemble_member(g, es, sb, m, 1));
    }
    return e;
}

std::vector<RatioReport> run_product(const RunConfig& c) {
    ProductParams pp;
    pp.p = c.p;
    pp.q = c.q;
    pp.theta = c.model.theta;
    pp.theta1 = c.model.theta1;
    const Grid coarse = c.grid(), fine(c.dim, 2 * c.n, c.half_width);
    const Ensemble e1 = build_ensemble(coarse, c.ensemble, pp.s1(c.dim), pp.s2(c.dim));
    const Ensemble e2 = build_ensemble(fine, c.ensemble, pp.s1(c.dim), pp.s2(c.dim));
    const ProductStudy a = product_study(e1.a, e1.b, pp);
    const ProductStudy b = product_study(e2.a, e2.b, pp);
    const double change = std::abs(b.max_ratio / a.max_ratio - 1.0);
    RatioReport r = make("product", c,
                         {{"p", pp.p}, {"q", pp.q}, {"theta", pp.theta}, {"theta1", pp.theta1},
                          {"coarse", a.max_ratio}, {"fine", b.max_ratio}, {"skipped", a.skipped + b.skipped}},
                         b.max_ratio, kNaN, change, std::isfinite(b.max_ratio) && b.max_ratio > 0.0 && change <= 0.10,
                         grid_tag(fine));
    r.ensemble = c.ensemble.members;
    return {r};
}

std::vector<RatioReport> run_constant(const RunConfig& c, bool bilinear) {
    const Grid coarse = c.grid(), fine(c.dim, 2 * c.n, c.half_width);
    const double s_eta = c.iteration.besov_eta.s, s_v = c.iteration.besov_v.s;
    const Ensemble e1 = build_ensemble(coarse, c.ensemble, s_eta, s_v);
    const Ensemble e2 = build_ensemble(fine, c.ensemble, s_eta, s_v);
    const ConstantStudy a = bilinear ? bilinear_constant_study(e1.a, e1.b, c.model, c.T_values, c.steps, c.p, c.q)
                                     : linear_operator_study(e1.a, c.model, c.T_values, c.steps, c.p, c.q);
    const ConstantStudy b = bilinear ? bilinear_constant_study(e2.a, e2.b, c.model, c.T_values, 2 * c.steps, c.p, c.q)
                                     : linear_operator_study(e2.a, c.model, c.T_values, 2 * c.steps, c.p, c.q);
    const double change = std::abs(b.max / a.max - 1.0);
    RatioReport r = b.report;
    nlohmann::json j = nlohmann::json::parse(r.params_json);
    j["coarse_per_T"] = a.constant;
    j["coarse_variation"] = a.variation;
    j["refinement_change"] = change;
    r.params_json = j.dump();
    r.seed = c.seed;
    const bool ok = std::isfinite(b.max) && b.max > 0.0 && a.variation <= 0.15 && b.variation <= 0.15 && change <= 0.10;
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    return {r};
}

struct Data {
    SpectralField eta0, v0;
};

Data build_data(const RunConfig& c, const Grid& grid) {
    Data d{SpectralField(grid), SpectralField(grid)};
    if (c.data_kind == "zero") return d;
    if (c.data_kind == "homogeneous") {
        HomogeneousData he, hv;
        he.degree = eta_degree(c.model);
        hv.degree = v_degree(c.model);
        he.amplitude = hv.amplitude = c.amplitude;
        he.xi_lo = hv.xi_lo = 0.5 * grid.xi_unit();
        he.xi_hi = hv.xi_hi = 0.3 * (grid.n() / 2) * grid.xi_unit();
        return {he.build(grid), hv.build(grid)};
    }
    EnsembleSpec es = c.ensemble;
    es.kmax = c.data_kmax > 0 ? c.data_kmax : std::max(1, grid.n() / 8);
    auto scaled = [&](unsigned tag) {
        SpectralField f = ensemble_member(grid, es, 0.0, 0, tag);
        const double sup = sup_abs(dft_inverse(f));
        return sup > 0.0 ? (c.amplitude / sup) * f : f;
    };
    return {scaled(10), scaled(11)};
}

double ratio_or_zero(double a, double b) { return b > 0.0 ? a / b : 0.0; }

std::vector<RatioReport> run_solve(const RunConfig& c, Artifacts& art) {
    const Grid grid = c.grid();
    const TimeMesh mesh = c.mesh();
    const Data d = build_data(c, grid);
    const DuhamelPlan plan_B(grid, mesh, c.model, DuhamelKind::B);
    const DuhamelPlan plan_T(grid, mesh, c.model, DuhamelKind::T);
    const PicardResult res = picard_solve(d.eta0, d.v0, plan_B, plan_T, c.iteration);
    {
        auto os = art.open("trace.csv");
        res.trace.write_csv(os);
    }
    for (const char* name : {"eta", "v"}) {
        const fs::path p = art.dir / (std::string(name) + "_final.fkf");
        write_fkf(p.string(), name[0] == 'e' ? res.solution.eta.back() : res.solution.v.back(), name, mesh.t_final());
        art.files.push_back(p.filename().string());
    }
    std::vector<RatioReport> out;
    const double rho = res.trace.contraction_estimate();
    nlohmann::json jm = model_json(c.model);
    jm["iterations"] = res.trace.iterations();
    jm["data"] = c.data_kind;
    jm["amplitude"] = c.amplitude;
    RatioReport contraction = make("picard-contraction", c, jm, rho, kNaN, kNaN, res.trace.converged && rho < 1.0,
                                   grid_tag(grid));
    if (!res.trace.converged && !res.trace.diverged) contraction.verdict = Verdict::inconclusive;
    out.push_back(contraction);

    // empirical constants: maxima over the data and a seeded ensemble
    const DyadicCutoff cutoff(grid);
    const History lin = linear_part(d.eta0, d.v0, c.model, mesh);
    EmpiricalConstants k;
    const double n_eta0 = besov_norm(d.eta0, c.iteration.besov_eta, cutoff);
    const double n_v0 = besov_norm(d.v0, c.iteration.besov_v, cutoff);
    k.C1 = std::max(1.0, ratio_or_zero(sup_norm_in_time(lin.eta, c.iteration.besov_eta, cutoff), n_eta0));
    k.C2 = std::max(1.0, ratio_or_zero(sup_norm_in_time(lin.v, c.iteration.besov_v, cutoff), n_v0));
    EnsembleSpec es = c.ensemble;
    es.members = std::min<std::size_t>(es.members, 8);
    Ensemble e = build_ensemble(grid, es, c.iteration.besov_eta.s, c.iteration.besov_v.s);
    e.a.push_back(d.eta0);
    e.b.push_back(d.v0);
    const ConstantStudy kc = linear_operator_study(e.a, c.model, {mesh.t_final()}, c.steps, c.p, c.q);
    const ConstantStudy kk = bilinear_constant_study(e.a, e.b, c.model, {mesh.t_final()}, c.steps, c.p, c.q);
    k.C = std::max(kc.max, 1e-12);
    k.K = std::max(kk.max, 1e-12);
    const Smallness sm = smallness_check(d.eta0, d.v0, c.iteration, k);
    nlohmann::json jk = {{"C1", k.C1}, {"C2", k.C2}, {"C", k.C}, {"K", k.K}, {"ensemble", es.members + 1}};
    RatioReport small = make("smallness", c, jk, sm.eps, sm.eps_max, kNaN, sm.admitted, grid_tag(grid));
    if (!sm.admitted) small.verdict = Verdict::inconclusive;
    out.push_back(small);
    const BoundCheck bc = iterate_bounds(res.trace, sm, k);
    jk["worst_eta"] = bc.worst_eta;
    jk["worst_v"] = bc.worst_v;
    RatioReport bounds = make("iterate-bounds", c, jk, std::max(bc.worst_eta, bc.worst_v), 1.0, kNaN, bc.holds,
                              grid_tag(grid));
    if (!sm.admitted || sm.eps == 0.0) bounds.verdict = Verdict::inconclusive;
    out.push_back(bounds);
    return out;
}

std::vector<RatioReport> run_uniqueness(const RunConfig& c) {
    const Grid grid = c.grid();
    const Data d = build_data(c, grid);
    const UniquenessResult u = uniqueness_probe(d.eta0, d.v0, c.model, c.mesh(), c.iteration, c.starts, c.seed);
    nlohmann::json j = model_json(c.model);
    j["starts"] = c.starts;
    j["converged"] = u.converged_starts;
    j["failed"] = u.failed_starts;
    j["tol_rel"] = c.iteration.tol_rel;
    const bool ok = u.failed_starts.empty() && u.max_distance <= 10.0 * c.iteration.tol_rel;
    RatioReport r = make("uniqueness", c, j, u.max_distance, 0.0, u.max_distance, ok, grid_tag(grid));
    r.ensemble = static_cast<std::size_t>(c.starts);
    return {r};
}

std::vector<RatioReport> run_selfsim(const RunConfig& c, Artifacts& art) {
    std::vector<double> err_eta, err_v;
    std::vector<int> ns;
    std::vector<bool> converged;
    double linear_modes = kNaN;
    auto os = art.open("selfsim.csv");
    os << "level,n,half_width,err_eta,err_v,converged\n" << std::setprecision(12);
    for (int level = 0; level < c.levels; ++level) {
        RunConfig lc = c;
        lc.n = c.n << (2 * level);
        lc.half_width = c.half_width * std::ldexp(1.0, level);
        lc.data_kind = "homogeneous";
        const Grid grid = lc.grid();
        const TimeMesh mesh = lc.mesh();
        const Data d = build_data(lc, grid);
        const PicardResult res = picard_solve(d.eta0, d.v0, c.model, mesh, c.iteration);
        const SelfSimResult s = selfsim_check(res.solution, mesh, c.model, c.sigma, c.t_from * c.t_final);
        err_eta.push_back(s.err_eta);
        err_v.push_back(s.err_v);
        ns.push_back(lc.n);
        converged.push_back(res.trace.converged);
        os << level << ',' << lc.n << ',' << lc.half_width << ',' << s.err_eta << ',' << s.err_v << ','
           << res.trace.converged << '\n';
        if (level == 0) {
            HomogeneousData h;
            h.degree = eta_degree(c.model);
            h.amplitude = c.amplitude;
            h.xi_lo = 0.5 * grid.xi_unit();
            h.xi_hi = 0.3 * (grid.n() / 2) * grid.xi_unit();
            linear_modes = selfsim_linear_modes(h, grid, c.model, c.sigma, {0.25 * c.t_final, 0.5 * c.t_final});
        }
    }
    bool decreasing = std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
    for (std::size_t i = 1; i < err_eta.size(); ++i)
        decreasing = decreasing && err_eta[i] < err_eta[i - 1] && err_v[i] < err_v[i - 1];
    nlohmann::json j = model_json(c.model);
    j["sigma"] = c.sigma;
    j["n"] = ns;
    j["err_eta"] = err_eta;
    j["err_v"] = err_v;
    std::vector<RatioReport> out;
    out.push_back(make("selfsim-refinement", c, j, std::max(err_eta.back(), err_v.back()), 0.0, kNaN, decreasing,
                       grid_tag(c.grid())));
    out.push_back(make("selfsim-linear-modes", c, {{"sigma", c.sigma}, {"tolerance", 1e-8}}, linear_modes, 0.0,
                       linear_modes, linear_modes <= 1e-8, grid_tag(c.grid())));
    return out;
}

void write_checks_json(const Artifacts& art, const std::vector<RatioReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports)
        j.push_back({{"check_id", r.check_id}, {"verdict", to_string(r.verdict)}, {"files", art.files}});
    std::ofstream os(art.dir / "checks.json");
    os << j.dump(1) << '\n';
}

}  // namespace

std::vector<RatioReport> run(const RunConfig& c, std::ostream& log) {
    Artifacts art(fs::path(c.output_dir) / to_string(c.experiment));
    std::vector<RatioReport> reports;
    try {
        switch (c.experiment) {
            case Experiment::ml_eval: reports = run_ml_eval(c); break;
            case Experiment::mainardi_moments: reports = run_mainardi(c); break;
            case Experiment::decay_heat:
            case Experiment::decay_ml: reports = run_decay(c, art); break;
            case Experiment::yamazaki: reports = run_yamazaki(c); break;
            case Experiment::product: reports = run_product(c); break;
            case Experiment::bilinear: reports = run_constant(c, true); break;
            case Experiment::linear_op: reports = run_constant(c, false); break;
            case Experiment::solve: reports = run_solve(c, art); break;
            case Experiment::selfsim: reports = run_selfsim(c, art); break;
            case Experiment::uniqueness: reports = run_uniqueness(c); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("[") + info(c.experiment).module + "/" + to_string(c.experiment) + "] " +
                                 e.what());
    }
    {
        auto os = art.open("report.csv");
        write_csv_header(os);
        for (const auto& r : reports) write_csv_row(os, r);
    }
    write_checks_json(art, reports);
    for (const auto& r : reports)
        log << std::left << std::setw(13) << to_string(r.verdict) << std::setw(26) << r.check_id
            << " measured=" << std::setprecision(6) << r.measured << " predicted=" << r.predicted
            << " rel_dev=" << r.rel_dev << '\n';
    return reports;
}

int exit_status(const std::vector<RatioReport>& reports) {
    for (const auto& r : reports)
        if (r.verdict == Verdict::fail) return 1;
    return 0;
}

std::string check_anchor(const std::string& id) {
    static const std::map<std::string, std::string> anchors = {
        {"ml-oracle", "plumbing"},
        {"mainardi-moment", "Mainardi function: positivity and moments"},
        {"mainardi-representation", "Mittag-Leffler functions as Mainardi integrals"},
        {"decay-heat", "fractional heat semigroup decay estimate"},
        {"decay-ml-E_alpha", "Mittag-Leffler operator decay estimate (E_alpha)"},
        {"decay-ml-E_alpha_alpha", "Mittag-Leffler operator decay estimate (E_alpha,alpha)"},
        {"yamazaki", "Yamazaki-type time integral estimate"},
        {"product", "product estimate"},
        {"bilinear-K", "bilinear estimate"},
        {"linear-op-C", "linear operator estimate"},
        {"picard-contraction", "global well-posedness: contraction"},
        {"smallness", "global well-posedness: smallness condition"},
        {"iterate-bounds", "global well-posedness: iterate bounds"},
        {"uniqueness", "global well-posedness: uniqueness"},
        {"selfsim-refinement", "self-similar solutions"},
        {"selfsim-linear-modes", "self-similar solutions: linear part"},
    };
    const auto it = anchors.find(id);
    return it == anchors.end() ? "plumbing" : it->second;
}

std::size_t report_index(const std::string& output_dir) {
    const fs::path root(output_dir);
    fs::create_directories(root);
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "checks.json")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    std::ostringstream md;
    md << "# Check index\n\n| result | check | experiment | verdict | files |\n|---|---|---|---|---|\n";
    std::size_t rows = 0;
    for (const auto& d : dirs) {
        std::ifstream in(d / "checks.json");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        const std::string exp = d.filename().string();
        for (const auto& c : j) {
            const std::string id = c.value("check_id", "");
            std::string files;
            for (const auto& f : c.value("files", nlohmann::json::array()))
                files += (files.empty() ? "" : ", ") + ("[" + f.get<std::string>() + "](" + exp + "/" + f.get<std::string>() + ")");
            md << "| " << check_anchor(id) << " | " << id << " | " << exp << " | " << c.value("verdict", "") << " | "
               << files << " |\n";
            ++rows;
        }
    }
    std::ofstream os(root / "index.md");
    os << md.str();
    return rows;
}

}  // namespace fracks
