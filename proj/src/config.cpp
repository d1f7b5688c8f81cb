#include "rtv/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rtv/errors.hpp"

namespace rtv {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"profile", {"family", "kind", "rho_minus", "rho_plus", "ell", "a", "path"}},
        {"physical", {"g", "mu", "k", "k_min", "k_max", "k_count", "k1", "k2"}},
        {"numerical",
         {"n_elements", "grading", "grading_ratio", "tol", "eps_star", "n_modes", "lambda_grid_points",
          "window_grid_points", "truncation_margin"}},
        {"output", {"directory", "formats"}},
    };
    return s;
}

const char* kSchemaHint =
    "[profile] family = tanh|bump|tabulated, rho_minus, rho_plus, ell (tanh), a (bump), path (tabulated), "
    "kind = compact|increasing; [physical] g, mu, k or k_min/k_max/k_count, optional k1, k2";

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& sec, const std::string& key) const {
        const auto s = tree_.get_child_optional(sec);
        if (!s) return std::nullopt;
        const auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    std::optional<double> number(const std::string& sec, const std::string& key) const {
        const auto t = text(sec, key);
        if (!t) return std::nullopt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(*t, &pos);
            if (pos != t->size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(sec + "." + key + ": expected a number, got '" + *t + "'", "config_value");
        }
    }

    std::optional<int> integer(const std::string& sec, const std::string& key) const {
        const auto v = number(sec, key);
        if (!v) return std::nullopt;
        if (std::floor(*v) != *v) throw ConfigError(sec + "." + key + ": expected an integer", "config_value");
        return static_cast<int>(*v);
    }

    double required(const std::string& sec, const std::string& key) const {
        const auto v = number(sec, key);
        if (!v) throw ConfigError("missing required key " + sec + "." + key + "; expected " + kSchemaHint, "config_missing");
        return *v;
    }

private:
    const pt::ptree& tree_;
};

double positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError(name + " must be positive", "config_value");
    return v;
}

}  // namespace

DensityProfile RunConfig::make_profile() const {
    try {
        if (profile.family == "tanh") {
            auto p = make_tanh({profile.rho_minus, profile.rho_plus, profile.ell});
            return profile.kind == p.kind() ? p : p.relabeled(profile.kind);
        }
        if (profile.family == "bump") {
            auto p = make_bump({profile.rho_minus, profile.rho_plus, profile.a});
            return profile.kind == p.kind() ? p : p.relabeled(profile.kind);
        }
        return make_tabulated(read_tabulated_csv(profile.path, profile.kind));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("profile: ") + e.what(), e.tag() == "domain" ? "config_value" : e.tag());
    }
}

PhysicalParams RunConfig::physical(double k) const {
    PhysicalParams p;
    p.g = g;
    p.mu = mu;
    p.k = k;
    p.k1 = k1.value_or(k);
    p.k2 = k2.value_or(0.0);
    if (k1 && !k2) p.k2 = std::sqrt(std::max(0.0, k * k - p.k1 * p.k1));
    if (k2 && !k1) p.k1 = std::sqrt(std::max(0.0, k * k - p.k2 * p.k2));
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), "config_value");
    }
    return p;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()),
                          "config_syntax");
    }
    for (const auto& [sec, body] : tree) {
        const auto it = schema().find(sec);
        if (it == schema().end()) throw ConfigError("unknown section [" + sec + "]", "config_unknown");
        if (!body.data().empty() && body.empty())
            throw ConfigError("key '" + sec + "' outside any section", "config_unknown");
        for (const auto& kv : body)
            if (!it->second.count(kv.first))
                throw ConfigError("unknown key '" + kv.first + "' in section [" + sec + "]", "config_unknown");
    }
    const Reader r(tree);
    RunConfig c;

    // profile
    const auto fam = r.text("profile", "family");
    if (!fam) throw ConfigError(std::string("missing required key profile.family; expected ") + kSchemaHint, "config_missing");
    c.profile.family = *fam;
    if (*fam == "tanh") {
        c.profile.kind = ProfileKind::StrictlyIncreasing;
        c.profile.ell = positive(r.required("profile", "ell"), "profile.ell");
    } else if (*fam == "bump") {
        c.profile.kind = ProfileKind::CompactGradient;
        c.profile.a = positive(r.required("profile", "a"), "profile.a");
    } else if (*fam == "tabulated") {
        c.profile.kind = ProfileKind::CompactGradient;
        const auto path = r.text("profile", "path");
        if (!path) throw ConfigError("missing required key profile.path for the tabulated family", "config_missing");
        std::filesystem::path p(*path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        c.profile.path = p.string();
    } else {
        throw ConfigError("profile.family must be one of tanh, bump, tabulated (got '" + *fam + "')", "config_value");
    }
    if (const auto kind = r.text("profile", "kind")) {
        if (*kind == "compact") c.profile.kind = ProfileKind::CompactGradient;
        else if (*kind == "increasing") c.profile.kind = ProfileKind::StrictlyIncreasing;
        else throw ConfigError("profile.kind must be compact or increasing", "config_value");
    }
    if (*fam != "tabulated") {
        c.profile.rho_minus = positive(r.required("profile", "rho_minus"), "profile.rho_minus");
        c.profile.rho_plus = positive(r.required("profile", "rho_plus"), "profile.rho_plus");
        if (!(c.profile.rho_minus < c.profile.rho_plus))
            throw ConfigError("profile.rho_minus must be below profile.rho_plus", "config_value");
    }

    // physical
    c.g = positive(r.required("physical", "g"), "physical.g");
    c.mu = positive(r.required("physical", "mu"), "physical.mu");
    const auto k = r.number("physical", "k");
    const auto kmin = r.number("physical", "k_min"), kmax = r.number("physical", "k_max");
    const auto kcount = r.integer("physical", "k_count");
    if (k && (kmin || kmax || kcount)) throw ConfigError("give either physical.k or a k range, not both", "config_value");
    if (k) {
        c.k_values = {positive(*k, "physical.k")};
    } else if (kmin && kmax && kcount) {
        positive(*kmin, "physical.k_min");
        if (!(*kmax > *kmin)) throw ConfigError("physical.k_max must exceed physical.k_min", "config_value");
        if (*kcount < 2) throw ConfigError("physical.k_count must be at least 2", "config_value");
        for (int i = 0; i < *kcount; ++i) c.k_values.push_back(*kmin + (*kmax - *kmin) * i / (*kcount - 1));
    } else {
        throw ConfigError("missing required key physical.k (or physical.k_min, k_max, k_count)", "config_missing");
    }
    c.k1 = r.number("physical", "k1");
    c.k2 = r.number("physical", "k2");
    if ((c.k1 || c.k2) && c.k_values.size() != 1)
        throw ConfigError("physical.k1 / physical.k2 require a single physical.k", "config_value");
    for (double kv : c.k_values) c.physical(kv);

    // numerical
    auto& n = c.numerical;
    if (const auto v = r.integer("numerical", "n_elements")) {
        if (*v < 4) throw ConfigError("numerical.n_elements must be at least 4", "config_value");
        n.n_elements = *v;
    }
    if (const auto v = r.text("numerical", "grading")) {
        if (*v == "uniform") n.grading = Grading::Uniform;
        else if (*v == "geometric") n.grading = Grading::Geometric;
        else throw ConfigError("numerical.grading must be uniform or geometric", "config_value");
    }
    if (const auto v = r.number("numerical", "grading_ratio")) {
        if (!(*v >= 1.0)) throw ConfigError("numerical.grading_ratio must be >= 1", "config_value");
        n.grading_ratio = *v;
    }
    if (const auto v = r.number("numerical", "tol")) n.tol = positive(*v, "numerical.tol");
    if (const auto v = r.number("numerical", "eps_star")) n.eps_star = positive(*v, "numerical.eps_star");
    if (const auto v = r.integer("numerical", "n_modes")) {
        if (*v < 1) throw ConfigError("numerical.n_modes must be positive", "config_value");
        n.n_modes = *v;
    }
    if (const auto v = r.integer("numerical", "lambda_grid_points")) {
        if (*v < 16) throw ConfigError("numerical.lambda_grid_points must be at least 16", "config_value");
        n.lambda_grid_points = *v;
    }
    if (const auto v = r.integer("numerical", "window_grid_points")) {
        if (*v < 2) throw ConfigError("numerical.window_grid_points must be at least 2", "config_value");
        n.window_grid_points = *v;
    }
    if (const auto v = r.number("numerical", "truncation_margin")) {
        if (!(*v > 0.0 && *v < 0.5)) throw ConfigError("numerical.truncation_margin must lie in (0, 0.5)", "config_value");
        n.truncation_margin = *v;
    }

    // output
    if (const auto v = r.text("output", "directory")) c.out_dir = *v;
    if (const auto v = r.text("output", "formats")) {
        c.formats.clear();
        std::istringstream ss(*v);
        std::string f;
        while (std::getline(ss, f, ',')) {
            f.erase(0, f.find_first_not_of(" \t"));
            f.erase(f.find_last_not_of(" \t") + 1);
            if (f != "csv") throw ConfigError("output.formats: only csv is supported (got '" + f + "')", "config_value");
            c.formats.push_back(f);
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path, "config_io");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace rtv
