#pragma once

#include "pertproj/core.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pertproj {

inline const char* const kTumor = "tumor";
inline const char* const kMyelon = "myelon";
inline const char* const kLeftParotis = "left_parotis";
inline const char* const kRightParotis = "right_parotis";
inline const char* const kUnclassified = "unclassified";

/// Disk in grid coordinates, origin at the grid center, y pointing up. Units are voxels.
struct Disk {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

/// Synthetic 2D head-neck-like phantom. None of these are clinical values.
struct PhantomConfig {
    int grid_size = 64;
    int beams = 5;
    int beamlets_per_beam = 32;
    double mu = 0.05;           // attenuation per voxel length
    double sigma = 1.0;         // lateral Gaussian falloff, voxels
    double field_width = 32.0;  // lateral extent covered by one beam, voxels
    double body_radius = 30.0;
    double noise = 0.01;        // relative multiplicative kernel noise, uniform in [-noise, noise]
    std::uint64_t seed = 1;
    Disk tumor{0.0, 0.0, 10.0};
    Disk myelon{0.0, -14.0, 3.0};
    Disk left_parotis{-18.0, 6.0, 5.0};
    Disk right_parotis{18.0, 6.0, 5.0};

    void validate() const;
};

/// Reads `key = value` lines. Unknown keys and malformed values raise ConfigError with the line number.
PhantomConfig parse_phantom_config(const std::string& text);

struct Structure {
    std::string name;
    std::vector<Eigen::Index> voxels;  // row indices into P
    Matrix rows;                       // P restricted to `voxels`
};

/// d = P x. Voxels outside the body have zero rows and belong to no structure.
struct DoseModel {
    Matrix P;
    std::vector<Structure> structures;
    int grid_size = 0;

    [[nodiscard]] const Structure& structure(const std::string& name) const;
    [[nodiscard]] bool has_structure(const std::string& name) const;
    [[nodiscard]] Vector dose(const Vector& x) const;
};

DoseModel build_phantom(const PhantomConfig& cfg);

/// Inverse of parse_phantom_config.
std::string format_phantom_config(const PhantomConfig& cfg);

/// Writes P.csv (header b0..b{n-1}) and structures.csv (voxel_index, structure_name).
void save_dose_model(const DoseModel& model, const std::filesystem::path& dir);
/// Reads P.csv + structures.csv from `dir`, or rebuilds the phantom from
/// dir/phantom.cfg when P.csv is absent.
DoseModel load_dose_model(const std::filesystem::path& dir);

/// Model from a dose matrix and a voxel -> structure assignment (empty name: none).
DoseModel make_dose_model(Matrix P, const std::vector<std::string>& voxel_structure, int grid_size = 0);

struct DoseFunctionSpec {
    enum class Role { upper_tail, lower_tail, eud, conformity };
    Role role = Role::eud;
    std::string structure;
    double threshold = 0.0;  // U, L or d_ref
    double p = 2.0;          // eud and conformity

    static DoseFunctionSpec upper_tail(std::string s, double u) { return {Role::upper_tail, std::move(s), u, 2.0}; }
    static DoseFunctionSpec lower_tail(std::string s, double l) { return {Role::lower_tail, std::move(s), l, 2.0}; }
    static DoseFunctionSpec eud(std::string s, double p) { return {Role::eud, std::move(s), 0.0, p}; }
    static DoseFunctionSpec conformity(std::string s, double p, double ref) { return {Role::conformity, std::move(s), ref, p}; }

    void validate() const;
};

const char* to_string(DoseFunctionSpec::Role role);

/// Value and subgradient of a dose function, both with the 1/|O| prefactor:
///   upper_tail  mean max(0, d_i - U)^2
///   lower_tail  mean max(0, L - d_i)^2
///   eud         mean |d_i|^p
///   conformity  mean |d_ref - d_i|^p
Evaluation dose_function_eval(const DoseFunctionSpec& spec, const DoseModel& model, const Vector& x);

/// Same evaluation on dose values of one structure; `grad_d` is with respect to d.
double dose_function_on_doses(const DoseFunctionSpec& spec, const Vector& d, Vector* grad_d);

ConvexConstraint make_dose_constraint(const DoseFunctionSpec& spec, std::shared_ptr<const DoseModel> model);

struct ImrtSpecs {
    std::vector<DoseFunctionSpec> objective;
    std::vector<DoseFunctionSpec> constraints;
};

/// f: EUD p=2 on both parotids, myelon and unclassified tissue, conformity p=2 d_ref=60 on the tumor.
/// g: tumor lower tail L=55, tumor upper tail U=66, myelon upper tail U=45.
ImrtSpecs default_imrt_specs();

OptimizationProblem build_imrt_problem(std::shared_ptr<const DoseModel> model,
                                       const ImrtSpecs& specs = default_imrt_specs());

}  // namespace pertproj
