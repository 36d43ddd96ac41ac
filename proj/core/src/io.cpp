#include "galign/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "galign/util.hpp"

namespace galign {

namespace {

constexpr const char* kDatasetHeader = "galign-dataset v1";
constexpr const char* kTrajectoryHeader = "# galign-trajectory v1";
constexpr const char* kTemplateHeader = "galign-template v1";

std::string join_coords(const Element& e) {
    std::string out;
    for (int i = 0; i < e.manifold().factor_count(); ++i) {
        if (i) out += ',';
        out += fmt_double(e.coord(i));
    }
    return out;
}

std::vector<double> split_coords(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw IoError("bad coordinate '" + tok + "' in dataset file");
        }
    }
    return out;
}

std::string points_to_text(const PointSet& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ' ';
        out += fmt_double(pts[i].x) + " " + fmt_double(pts[i].y);
    }
    return out;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_dataset(const Dataset& d, const std::string& path) {
    std::ostringstream os;
    os << kDatasetHeader << "\n";
    os << "manifold " << d.manifold.spec_string() << "\n";
    os << "classes " << d.num_classes << "\n";
    os << "step_t " << d.step_t << "\n";
    for (int c = 0; c < d.num_classes; ++c)
        os << "class_shape " << c << " " << points_to_text(d.class_shapes[static_cast<std::size_t>(c)])
           << "\n";
    os << "specimens " << d.specimens.size() << "\n";
    for (const auto& s : d.specimens) {
        os << "specimen " << s.id << " " << s.class_label << " " << join_coords(s.true_pose) << " "
           << join_coords(s.accumulated_correction) << " " << points_to_text(s.canonical_shape) << "\n";
    }
    write_text_file(path, os.str());
}

Dataset read_dataset(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) || line != kDatasetHeader)
        throw IoError("'" + path + "' is not a recognized dataset file (expected '" +
                      std::string(kDatasetHeader) + "')");
    Dataset d;
    bool have_manifold = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "manifold") {
            std::string spec;
            ls >> spec;
            d.manifold = Manifold::parse(spec);
            have_manifold = true;
        } else if (tag == "classes") {
            ls >> d.num_classes;
            d.class_shapes.resize(static_cast<std::size_t>(d.num_classes));
        } else if (tag == "step_t") {
            ls >> d.step_t;
        } else if (tag == "class_shape") {
            int label = 0;
            ls >> label;
            PointSet pts;
            double x, y;
            while (ls >> x >> y) pts.push_back({x, y});
            if (label < 0 || label >= d.num_classes) throw IoError("class_shape label out of range");
            d.class_shapes[static_cast<std::size_t>(label)] = std::move(pts);
        } else if (tag == "specimens") {
            continue;  // count is implied by the records
        } else if (tag == "specimen") {
            if (!have_manifold) throw IoError("dataset file lists specimens before the manifold");
            Specimen s;
            std::string pose_str, corr_str;
            ls >> s.id >> s.class_label >> pose_str >> corr_str;
            if (ls.fail()) throw IoError("malformed specimen record in '" + path + "'");
            s.true_pose = Element(d.manifold, split_coords(pose_str));
            s.accumulated_correction = Element(d.manifold, split_coords(corr_str));
            double x, y;
            while (ls >> x >> y) s.canonical_shape.push_back({x, y});
            d.specimens.push_back(std::move(s));
        } else {
            throw IoError("unknown dataset record '" + tag + "' in '" + path + "'");
        }
    }
    if (!have_manifold) throw IoError("dataset file has no manifold record");
    return d;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << kTrajectoryHeader << "\n";
    os << "step";
    for (int i = 0; i < traj.manifold.factor_count(); ++i) os << ",mu_" << i;
    os << ",sigma2,sigma2_updated,drift_kept,drift_updated,residual,mean_loss,n_updated\n";
    for (const auto& r : traj.steps) {
        os << r.step;
        for (int i = 0; i < traj.manifold.factor_count(); ++i) os << "," << fmt_double(r.mu.coord(i));
        os << "," << fmt_double(r.sigma2) << "," << fmt_double(r.sigma2_updated) << ","
           << fmt_double(r.drift_kept) << "," << fmt_double(r.drift_updated) << ","
           << fmt_double(r.residual) << "," << fmt_double(r.mean_loss) << "," << r.n_updated << "\n";
    }
    return os.str();
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    write_text_file(path, trajectory_csv(traj));
}

std::vector<std::vector<double>> read_trajectory_csv(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) || line != kTrajectoryHeader)
        throw IoError("'" + path + "' is not a supported trajectory CSV (expected '" +
                      std::string(kTrajectoryHeader) + "')");
    if (!std::getline(is, line)) throw IoError("trajectory CSV '" + path + "' has no column header");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                row.push_back(std::stod(tok));
            } catch (...) {
                throw IoError("bad numeric cell '" + tok + "' in '" + path + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_template_state(const PointSet& shape, const std::string& path) {
    std::ostringstream os;
    os << kTemplateHeader << "\n";
    os << "points " << shape.size() << "\n";
    os << points_to_text(shape) << "\n";
    write_text_file(path, os.str());
}

PointSet read_template_state(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) || line != kTemplateHeader)
        throw IoError("'" + path + "' is not a recognized template file");
    std::size_t count = 0;
    std::string tag;
    is >> tag >> count;
    if (tag != "points") throw IoError("template file '" + path + "' missing point count");
    PointSet pts;
    double x, y;
    while (is >> x >> y) pts.push_back({x, y});
    if (pts.size() != count) throw IoError("template file '" + path + "' point count mismatch");
    return pts;
}

nlohmann::ordered_json run_manifest(const RunConfig& cfg, const Trajectory& traj) {
    nlohmann::ordered_json j;
    j["format"] = "galign-run-manifest v1";
    j["seed"] = cfg.seed;
    nlohmann::ordered_json jc;
    std::istringstream is(cfg.serialize());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        jc[line.substr(0, eq - 1)] = line.substr(eq + 2);
    }
    j["config"] = jc;
    j["stop_reason"] = traj.stop_reason;
    j["steps_recorded"] = traj.steps.size();
    j["sigma2_initial"] = traj.steps.empty() ? 0.0 : traj.steps.front().sigma2;
    j["sigma2_final"] = traj.steps.empty() ? 0.0 : traj.steps.back().sigma2;
    return j;
}

}  // namespace galign
