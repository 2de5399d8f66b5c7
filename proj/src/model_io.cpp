#include "pertproj/imrt.hpp"
#include "pertproj/io.hpp"

#include <sstream>

namespace pertproj {

namespace fs = std::filesystem;

std::string format_phantom_config(const PhantomConfig& cfg) {
    std::ostringstream out;
    auto disk = [&](const char* name, const Disk& d) {
        out << name << " = " << format_double(d.cx) << ", " << format_double(d.cy) << ", "
            << format_double(d.r) << "\n";
    };
    out << "grid_size = " << cfg.grid_size << "\n"
        << "beams = " << cfg.beams << "\n"
        << "beamlets_per_beam = " << cfg.beamlets_per_beam << "\n"
        << "mu = " << format_double(cfg.mu) << "\n"
        << "sigma = " << format_double(cfg.sigma) << "\n"
        << "field_width = " << format_double(cfg.field_width) << "\n"
        << "body_radius = " << format_double(cfg.body_radius) << "\n"
        << "noise = " << format_double(cfg.noise) << "\n"
        << "seed = " << cfg.seed << "\n";
    disk(kTumor, cfg.tumor);
    disk(kMyelon, cfg.myelon);
    disk(kLeftParotis, cfg.left_parotis);
    disk(kRightParotis, cfg.right_parotis);
    return out.str();
}

void save_dose_model(const DoseModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    write_matrix_csv(dir / "P.csv", model.P, "b");
    CsvWriter s(dir / "structures.csv", {"voxel_index", "structure_name"});
    std::vector<std::string> owner(static_cast<std::size_t>(model.P.rows()));
    for (const auto& st : model.structures) {
        for (Eigen::Index v : st.voxels) owner[static_cast<std::size_t>(v)] = st.name;
    }
    for (std::size_t v = 0; v < owner.size(); ++v) {
        if (!owner[v].empty()) s.row({std::to_string(v), owner[v]});
    }
}

DoseModel load_dose_model(const fs::path& dir) {
    if (!fs::exists(dir / "P.csv")) {
        if (fs::exists(dir / "phantom.cfg")) {
            return build_phantom(parse_phantom_config(read_text_file(dir / "phantom.cfg")));
        }
        throw ConfigError("no P.csv or phantom.cfg in " + dir.string());
    }
    Matrix P = read_numeric_csv(dir / "P.csv");
    std::vector<std::string> owner(static_cast<std::size_t>(P.rows()));
    std::istringstream lines(read_text_file(dir / "structures.csv"));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (n == 1 || line.empty()) continue;
        const auto comma = line.find(',');
        const KeyValue kv{"voxel_index", line.substr(0, comma), n};
        if (comma == std::string::npos) fail_at(kv, "expected voxel_index,structure_name");
        const std::uint64_t v = parse_u64(kv);
        if (v >= owner.size()) fail_at(kv, "voxel index outside P");
        if (!owner[v].empty()) fail_at(kv, "voxel assigned twice");
        owner[v] = line.substr(comma + 1);
    }
    return make_dose_model(std::move(P), owner);
}

}  // namespace pertproj
