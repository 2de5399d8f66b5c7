#include "pertproj/imrt.hpp"

#include "pertproj/io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace pertproj {

namespace {

bool disks_overlap(const Disk& a, const Disk& b) {
    return std::hypot(a.cx - b.cx, a.cy - b.cy) < a.r + b.r;
}

bool inside(const Disk& d, double x, double y) {
    return std::hypot(x - d.cx, y - d.cy) <= d.r;
}

}  // namespace

void PhantomConfig::validate() const {
    if (grid_size < 4) throw ConfigError("grid_size must be at least 4");
    if (beams < 1 || beamlets_per_beam < 1) throw ConfigError("need at least one beam and beamlet");
    if (!(mu >= 0.0) || !(sigma > 0.0) || !(field_width > 0.0)) {
        throw ConfigError("mu must be nonnegative, sigma and field_width positive");
    }
    if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("noise must lie in [0, 1)");
    if (!(body_radius > 0.0) || body_radius > 0.5 * grid_size) {
        throw ConfigError("body disk must fit inside the grid");
    }
    const std::pair<const char*, const Disk*> disks[] = {
        {kTumor, &tumor}, {kMyelon, &myelon}, {kLeftParotis, &left_parotis}, {kRightParotis, &right_parotis}};
    for (const auto& [name, d] : disks) {
        if (!(d->r > 0.0)) throw ConfigError(std::string(name) + " radius must be positive");
        if (std::hypot(d->cx, d->cy) + d->r > body_radius) {
            throw ConfigError(std::string(name) + " extends outside the body");
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            if (disks_overlap(*disks[i].second, *disks[j].second)) {
                throw ConfigError(std::string("structures overlap: ") + disks[i].first + ", " +
                                  disks[j].first);
            }
        }
    }
}

PhantomConfig parse_phantom_config(const std::string& text) {
    PhantomConfig cfg;
    const std::map<std::string, Disk*> disks = {{"tumor", &cfg.tumor},
                                                {"myelon", &cfg.myelon},
                                                {"left_parotis", &cfg.left_parotis},
                                                {"right_parotis", &cfg.right_parotis}};
    for (const KeyValue& kv : parse_key_values(text)) {
        const std::string& k = kv.key;
        if (k == "grid_size") cfg.grid_size = static_cast<int>(parse_int(kv));
        else if (k == "beams") cfg.beams = static_cast<int>(parse_int(kv));
        else if (k == "beamlets_per_beam") cfg.beamlets_per_beam = static_cast<int>(parse_int(kv));
        else if (k == "mu") cfg.mu = parse_double(kv);
        else if (k == "sigma") cfg.sigma = parse_double(kv);
        else if (k == "field_width") cfg.field_width = parse_double(kv);
        else if (k == "body_radius") cfg.body_radius = parse_double(kv);
        else if (k == "noise") cfg.noise = parse_double(kv);
        else if (k == "seed") cfg.seed = parse_u64(kv);
        else {
            // <structure> = cx, cy, r
            auto it = disks.find(k);
            if (it == disks.end()) fail_at(kv, "unknown key");
            const std::vector<double> v = parse_double_list(kv);
            if (v.size() != 3) fail_at(kv, "expected cx, cy, r");
            *it->second = Disk{v[0], v[1], v[2]};
        }
    }
    cfg.validate();
    return cfg;
}

const Structure& DoseModel::structure(const std::string& name) const {
    for (const auto& s : structures) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown structure '" + name + "'");
}

bool DoseModel::has_structure(const std::string& name) const {
    return std::any_of(structures.begin(), structures.end(),
                       [&](const Structure& s) { return s.name == name; });
}

Vector DoseModel::dose(const Vector& x) const {
    require_dimension(x, P.cols(), "dose");
    return P * x;
}

DoseModel make_dose_model(Matrix P, const std::vector<std::string>& voxel_structure, int grid_size) {
    if (static_cast<Eigen::Index>(voxel_structure.size()) != P.rows()) {
        throw DimensionError("structure assignment length differs from voxel count");
    }
    if ((P.array() < 0.0).any()) throw ConfigError("dose matrix has negative entries");
    DoseModel m;
    m.grid_size = grid_size;
    for (Eigen::Index v = 0; v < P.rows(); ++v) {
        const std::string& name = voxel_structure[static_cast<std::size_t>(v)];
        if (name.empty()) continue;
        auto it = std::find_if(m.structures.begin(), m.structures.end(),
                               [&](const Structure& s) { return s.name == name; });
        if (it == m.structures.end()) {
            m.structures.push_back(Structure{name, {}, {}});
            it = std::prev(m.structures.end());
        }
        it->voxels.push_back(v);
    }
    for (auto& s : m.structures) s.rows = P(s.voxels, Eigen::all);
    m.P = std::move(P);
    return m;
}

DoseModel build_phantom(const PhantomConfig& cfg) {
    cfg.validate();
    const int n = cfg.grid_size;
    const Eigen::Index voxels = static_cast<Eigen::Index>(n) * n;
    const Eigen::Index beamlets = static_cast<Eigen::Index>(cfg.beams) * cfg.beamlets_per_beam;
    const double half = 0.5 * (n - 1);
    const double spacing = cfg.field_width / cfg.beamlets_per_beam;
    const double R = cfg.body_radius;

    Matrix P = Matrix::Zero(voxels, beamlets);
    std::vector<std::string> label(static_cast<std::size_t>(voxels));
    // Raw engine bits keep the noise identical across standard libraries.
    std::mt19937_64 rng(cfg.seed);
    const double to_unit = 1.0 / 9007199254740992.0;  // 2^-53

    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            const Eigen::Index v = static_cast<Eigen::Index>(row) * n + col;
            const double x = col - half;
            const double y = half - row;
            if (std::hypot(x, y) > R) continue;
            std::string& name = label[static_cast<std::size_t>(v)];
            if (inside(cfg.tumor, x, y)) name = kTumor;
            else if (inside(cfg.myelon, x, y)) name = kMyelon;
            else if (inside(cfg.left_parotis, x, y)) name = kLeftParotis;
            else if (inside(cfg.right_parotis, x, y)) name = kRightParotis;
            else name = kUnclassified;

            for (int b = 0; b < cfg.beams; ++b) {
                const double theta = 2.0 * std::numbers::pi * b / cfg.beams;
                // u: travel direction, w: lateral axis.
                const double ux = std::cos(theta), uy = std::sin(theta);
                const double s = -uy * x + ux * y;
                const double t = ux * x + uy * y;
                const double depth = t + std::sqrt(std::max(0.0, R * R - s * s));
                const double atten = std::exp(-cfg.mu * std::max(0.0, depth));
                for (int j = 0; j < cfg.beamlets_per_beam; ++j) {
                    const double sj = (j - 0.5 * (cfg.beamlets_per_beam - 1)) * spacing;
                    const double lateral = std::exp(-(s - sj) * (s - sj) / (2.0 * cfg.sigma * cfg.sigma));
                    const double u01 = static_cast<double>(rng() >> 11) * to_unit;
                    const double jitter = 1.0 + cfg.noise * (2.0 * u01 - 1.0);
                    P(v, static_cast<Eigen::Index>(b) * cfg.beamlets_per_beam + j) = atten * lateral * jitter;
                }
            }
        }
    }
    return make_dose_model(std::move(P), label, n);
}

void DoseFunctionSpec::validate() const {
    if (structure.empty()) throw ConfigError("dose function without structure");
    if ((role == Role::eud || role == Role::conformity) && !(p >= 1.0)) {
        throw ConfigError("dose function exponent must be at least 1");
    }
    if (!std::isfinite(threshold)) throw ConfigError("dose threshold is not finite");
}

const char* to_string(DoseFunctionSpec::Role role) {
    switch (role) {
        case DoseFunctionSpec::Role::upper_tail: return "upper_tail";
        case DoseFunctionSpec::Role::lower_tail: return "lower_tail";
        case DoseFunctionSpec::Role::eud: return "eud";
        case DoseFunctionSpec::Role::conformity: return "conformity";
    }
    return "?";
}

namespace {

// |r|^p and its derivative p |r|^(p-1) sign(r), with derivative 0 at r = 0.
double power_term(double r, double p, double* deriv) {
    const double a = std::abs(r);
    if (p == 2.0) {
        *deriv = 2.0 * r;
        return r * r;
    }
    *deriv = a == 0.0 ? 0.0 : p * std::pow(a, p - 1.0) * (r > 0.0 ? 1.0 : -1.0);
    return std::pow(a, p);
}

}  // namespace

double dose_function_on_doses(const DoseFunctionSpec& spec, const Vector& d, Vector* grad_d) {
    const Eigen::Index m = d.size();
    if (m == 0) throw ConfigError("structure '" + spec.structure + "' has no voxels");
    const double inv = 1.0 / static_cast<double>(m);
    double sum = 0.0;
    if (grad_d) grad_d->resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double value = 0.0;
        double deriv = 0.0;
        switch (spec.role) {
            case DoseFunctionSpec::Role::upper_tail: {
                const double e = std::max(0.0, d(i) - spec.threshold);
                value = e * e;
                deriv = 2.0 * e;
                break;
            }
            case DoseFunctionSpec::Role::lower_tail: {
                const double e = std::max(0.0, spec.threshold - d(i));
                value = e * e;
                deriv = -2.0 * e;
                break;
            }
            case DoseFunctionSpec::Role::eud:
                value = power_term(d(i), spec.p, &deriv);
                break;
            case DoseFunctionSpec::Role::conformity: {
                double dr = 0.0;
                value = power_term(spec.threshold - d(i), spec.p, &dr);
                deriv = -dr;
                break;
            }
        }
        sum += value;
        if (grad_d) (*grad_d)(i) = inv * deriv;
    }
    return inv * sum;
}

Evaluation dose_function_eval(const DoseFunctionSpec& spec, const DoseModel& model, const Vector& x) {
    spec.validate();
    require_dimension(x, model.P.cols(), "dose_function_eval");
    const Structure& s = model.structure(spec.structure);
    const Vector d = s.rows * x;
    Vector g;
    const double value = dose_function_on_doses(spec, d, &g);
    return Evaluation{value, s.rows.transpose() * g};
}

ConvexConstraint make_dose_constraint(const DoseFunctionSpec& spec, std::shared_ptr<const DoseModel> model) {
    spec.validate();
    if (!model) throw ConfigError("dose model is null");
    if (!model->has_structure(spec.structure)) throw ConfigError("unknown structure '" + spec.structure + "'");
    const std::string label = std::string(to_string(spec.role)) + "(" + spec.structure + ")";
    return ConvexConstraint(
        model->P.cols(),
        [spec, model](const Vector& x) { return dose_function_eval(spec, *model, x); }, label);
}

ImrtSpecs default_imrt_specs() {
    ImrtSpecs s;
    s.objective = {DoseFunctionSpec::eud(kLeftParotis, 2.0), DoseFunctionSpec::eud(kRightParotis, 2.0),
                   DoseFunctionSpec::eud(kMyelon, 2.0), DoseFunctionSpec::eud(kUnclassified, 2.0),
                   DoseFunctionSpec::conformity(kTumor, 2.0, 60.0)};
    s.constraints = {DoseFunctionSpec::lower_tail(kTumor, 55.0), DoseFunctionSpec::upper_tail(kTumor, 66.0),
                     DoseFunctionSpec::upper_tail(kMyelon, 45.0)};
    return s;
}

OptimizationProblem build_imrt_problem(std::shared_ptr<const DoseModel> model, const ImrtSpecs& specs) {
    if (!model) throw ConfigError("dose model is null");
    if (specs.objective.empty()) throw ConfigError("objective has no terms");
    for (const auto& sp : specs.objective) {
        sp.validate();
        if (!model->has_structure(sp.structure)) throw ConfigError("unknown structure '" + sp.structure + "'");
    }
    const std::vector<DoseFunctionSpec> terms = specs.objective;
    ConvexConstraint f(
        model->P.cols(),
        [terms, model](const Vector& x) {
            Evaluation total{0.0, Vector::Zero(x.size())};
            for (const auto& t : terms) {
                Evaluation e = dose_function_eval(t, *model, x);
                total.value += e.value;
                total.subgradient += e.subgradient;
            }
            return total;
        },
        "f");
    std::vector<ConvexConstraint> g;
    for (const auto& sp : specs.constraints) g.push_back(make_dose_constraint(sp, model));
    return OptimizationProblem(std::move(f), std::move(g), true);
}

}  // namespace pertproj
