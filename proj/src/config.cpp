#include "entlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace entlab {

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
        std::ostringstream os;
        os << source_;
        if (node.IsDefined() && node.Mark().line >= 0) os << ':' << node.Mark().line + 1;
        os << ": " << what;
        throw ConfigError(os.str());
    }

    double real(const YAML::Node& node, const std::string& field) const {
        try {
            return node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, "field '" + field + "' must be a number");
        }
    }

    std::string text(const YAML::Node& node, const std::string& field) const {
        if (!node.IsScalar()) fail(node, "field '" + field + "' must be a string");
        return node.as<std::string>();
    }

    bool flag(const YAML::Node& node, const std::string& field) const {
        try {
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, "field '" + field + "' must be true or false");
        }
    }

    std::vector<double> reals(const YAML::Node& node, const std::string& field) const {
        if (!node.IsSequence()) fail(node, "field '" + field + "' must be a list of numbers");
        std::vector<double> out;
        for (const auto& item : node) out.push_back(real(item, field));
        return out;
    }

    void only(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& where) const {
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end())
                fail(kv.first, "unknown field '" + key + "' in " + where);
        }
    }

private:
    std::string source_;
};

// Parameter names per family, in FamilySpec (a, b) order.
std::pair<const char*, const char*> parameter_names(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return {"mean", "variance"};
    case FamilyKind::logistic: return {"scale", nullptr};
    case FamilyKind::gumbel: return {"beta", nullptr};
    case FamilyKind::gamma: return {"shape", nullptr};
    case FamilyKind::smoothed_laplace: return {"a", "c"};
    case FamilyKind::uniform: return {"lo", "hi"};
    case FamilyKind::laplace: return {"b", nullptr};
    case FamilyKind::gaussian_mixture: return {"separation", "sd"};
    }
    return {nullptr, nullptr};
}

FamilySpec default_spec(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return FamilySpec::gaussian(0.0, 1.0);
    case FamilyKind::logistic: return FamilySpec::logistic(1.0);
    case FamilyKind::gumbel: return FamilySpec::gumbel(1.0);
    case FamilyKind::gamma: return FamilySpec::gamma(4.0);
    case FamilyKind::smoothed_laplace: return FamilySpec::smoothed_laplace(0.5);
    case FamilyKind::uniform: return FamilySpec::uniform(0.0, 1.0);
    case FamilyKind::laplace: return FamilySpec::laplace(1.0);
    case FamilyKind::gaussian_mixture: return FamilySpec::gaussian_mixture(3.0, 1.0);
    }
    return {};
}

DistributionEntry read_distribution(const Reader& r, const YAML::Node& node, std::size_t index) {
    const std::string where = "distributions[" + std::to_string(index) + "]";
    if (!node.IsMap()) r.fail(node, where + " must be a mapping");
    r.only(node, {"name", "family", "params", "isotropize", "smooth"}, where);
    DistributionEntry e;
    if (!node["name"]) r.fail(node, where + ": missing field 'name'");
    if (!node["family"]) r.fail(node, where + ": missing field 'family'");
    e.name = r.text(node["name"], "name");
    const YAML::Node fam = node["family"];
    FamilyKind kind;
    try {
        kind = family_kind_from_string(r.text(fam, "family"));
    } catch (const DomainError& ex) {
        r.fail(fam, where + ": " + ex.what());
    }
    e.spec = default_spec(kind);
    if (const YAML::Node params = node["params"]) {
        if (!params.IsMap()) r.fail(params, where + ": field 'params' must be a mapping");
        const auto [na, nb] = parameter_names(kind);
        for (const auto& kv : params) {
            const auto key = kv.first.as<std::string>();
            if (na && key == na)
                e.spec.a = r.real(kv.second, key);
            else if (nb && key == nb)
                e.spec.b = r.real(kv.second, key);
            else
                r.fail(kv.first, where + ": family '" + std::string(to_string(kind)) +
                                     "' has no parameter '" + key + "'");
        }
    }
    try {
        e.spec.validate();
    } catch (const DomainError& ex) {
        r.fail(node["params"] ? node["params"] : node, where + ": " + ex.what());
    }
    if (node["isotropize"]) e.isotropize = r.flag(node["isotropize"], "isotropize");
    if (node["smooth"]) {
        e.smooth = r.real(node["smooth"], "smooth");
        if (!(e.smooth >= 0.0) || !std::isfinite(e.smooth))
            r.fail(node["smooth"], where + ": field 'smooth' must be >= 0");
    }
    return e;
}

CheckSet read_checks(const Reader& r, const YAML::Node& node) {
    if (!node.IsSequence()) r.fail(node, "field 'checks' must be a list");
    CheckSet c{false, false, false, false};
    for (const auto& item : node) {
        const auto v = r.text(item, "checks");
        if (v == "functionals") c.functionals = true;
        else if (v == "deficits") c.deficits = true;
        else if (v == "lemmas") c.lemmas = true;
        else if (v == "poincare") c.poincare = true;
        else if (v == "all") c = CheckSet{};
        else r.fail(item, "field 'checks': unknown entry '" + v +
                              "' (expected functionals, deficits, lemmas, poincare or all)");
    }
    return c;
}

} // namespace

void ExperimentConfig::validate() const {
    std::set<std::string> names;
    for (const auto& d : distributions)
        if (!names.insert(d.name).second) throw ConfigError("distribution name '" + d.name + "' is not unique");
    for (const auto& [a, b] : pairs)
        for (const auto& n : {a, b})
            if (!names.count(n)) throw ConfigError("pair refers to unknown distribution '" + n + "'");
    if (distributions.empty()) throw ConfigError("field 'distributions' must not be empty");
    if (lambda_grid.empty()) throw ConfigError("field 'lambda_grid' must not be empty");
    if (t_grid.empty()) throw ConfigError("field 't_grid' must not be empty");
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("field 'lambda_grid': " + std::to_string(l) + " is outside [0, 1]");
    for (double t : t_grid)
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("field 't_grid': " + std::to_string(t) + " is negative");
    if (resolution < 256) throw ConfigError("field 'resolution' must be >= 256");
}

const DistributionEntry& ExperimentConfig::distribution(std::string_view name) const {
    for (const auto& d : distributions)
        if (d.name == name) return d;
    throw ConfigError("unknown distribution '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    const Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& ex) {
        std::ostringstream os;
        os << source << ':' << ex.mark.line + 1 << ": " << ex.msg;
        throw ConfigError(os.str());
    }
    if (!root.IsMap()) r.fail(root, "top level must be a mapping");
    r.only(root, {"distributions", "pairs", "lambda_grid", "t_grid", "resolution", "output_dir", "checks"},
           "the top level");

    ExperimentConfig cfg;
    std::map<std::string, YAML::Node> seen;
    if (const auto ds = root["distributions"]) {
        if (!ds.IsSequence()) r.fail(ds, "field 'distributions' must be a list");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            cfg.distributions.push_back(read_distribution(r, ds[i], i));
            const auto& name = cfg.distributions.back().name;
            if (seen.count(name)) r.fail(ds[i], "distribution name '" + name + "' is not unique");
            seen[name] = ds[i];
        }
    }
    if (const auto ps = root["pairs"]) {
        if (!ps.IsSequence()) r.fail(ps, "field 'pairs' must be a list");
        for (const auto& p : ps) {
            if (!p.IsSequence() || p.size() != 2) r.fail(p, "each entry of 'pairs' must be a list of two names");
            const auto a = r.text(p[0], "pairs");
            const auto b = r.text(p[1], "pairs");
            for (const auto& [n, node] : {std::pair{a, p[0]}, std::pair{b, p[1]}})
                if (!seen.count(n)) r.fail(node, "pair refers to unknown distribution '" + n + "'");
            cfg.pairs.emplace_back(a, b);
        }
    }
    if (const auto n = root["lambda_grid"]) {
        cfg.lambda_grid = r.reals(n, "lambda_grid");
        for (std::size_t i = 0; i < n.size(); ++i)
            if (!(cfg.lambda_grid[i] >= 0.0 && cfg.lambda_grid[i] <= 1.0))
                r.fail(n[i], "field 'lambda_grid': value " + n[i].as<std::string>() + " is outside [0, 1]");
    }
    if (const auto n = root["t_grid"]) {
        cfg.t_grid = r.reals(n, "t_grid");
        for (std::size_t i = 0; i < n.size(); ++i)
            if (!(cfg.t_grid[i] >= 0.0) || !std::isfinite(cfg.t_grid[i]))
                r.fail(n[i], "field 't_grid': value " + n[i].as<std::string>() + " must be >= 0");
    }
    if (const auto n = root["resolution"]) {
        const double v = r.real(n, "resolution");
        if (!(v >= 256.0) || v != std::floor(v) || v > 1e7)
            r.fail(n, "field 'resolution' must be an integer >= 256");
        cfg.resolution = static_cast<std::size_t>(v);
    }
    if (const auto n = root["output_dir"]) cfg.output_dir = r.text(n, "output_dir");
    if (const auto n = root["checks"]) cfg.checks = read_checks(r, n);

    if (cfg.distributions.empty()) r.fail(root, "field 'distributions' is missing or empty");
    if (cfg.lambda_grid.empty()) r.fail(root["lambda_grid"] ? root["lambda_grid"] : root, "field 'lambda_grid' is missing or empty");
    if (cfg.t_grid.empty()) r.fail(root["t_grid"] ? root["t_grid"] : root, "field 't_grid' is missing or empty");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string default_config_yaml() {
    return R"(# Built-in verification set.
resolution: 4096
checks: [all]
lambda_grid: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
t_grid: [0.25, 0.5, 1.0]
distributions:
  - {name: gaussian, family: gaussian, params: {mean: 0, variance: 1}}
  - {name: uniform, family: uniform, params: {lo: 0, hi: 1}}
  - {name: uniform_s, family: uniform, params: {lo: 0, hi: 1}, smooth: 0.001}
  - {name: logistic, family: logistic, params: {scale: 1}}
  - {name: smoothed_laplace, family: smoothed_laplace, params: {a: 0.5, c: 1}}
  - {name: gamma4, family: gamma, params: {shape: 4}}
  - {name: gamma6, family: gamma, params: {shape: 6}}
  - {name: gumbel, family: gumbel, params: {beta: 1}}
  - {name: mixture, family: gaussian_mixture, params: {separation: 3, sd: 1}}
pairs:
  - [uniform_s, logistic]
  - [logistic, smoothed_laplace]
  - [gaussian, gamma4]
  - [gumbel, logistic]
  - [gaussian, gaussian]
  - [mixture, logistic]
)";
}

ExperimentConfig default_config() { return parse_config(default_config_yaml(), "<built-in>"); }

} // namespace entlab
