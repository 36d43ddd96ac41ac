#include "galign/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "galign/util.hpp"

namespace galign {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config field '" + key + "': expected true/false, got '" + v + "'");
}

template <typename T>
T parse_num(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof())
        throw ConfigError("config field '" + key + "': bad numeric value '" + v + "'");
    return out;
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));

        if (key == "seed") c.seed = parse_num<std::uint64_t>(key, val);
        else if (key == "workers") c.workers = parse_num<int>(key, val);
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "plot") c.plot = parse_bool(key, val);
        else if (key == "dataset") c.dataset = val;
        else if (key == "manifold") c.manifold = val;
        else if (key == "classes") c.classes = parse_num<int>(key, val);
        else if (key == "per_class") c.per_class = parse_num<int>(key, val);
        else if (key == "pose") c.pose = val;
        else if (key == "shape_points") c.shape_points = parse_num<int>(key, val);
        else if (key == "shape_jitter") c.shape_jitter = parse_num<double>(key, val);
        else if (key == "class_similarity") c.class_similarity = parse_num<double>(key, val);
        else if (key == "alpha") c.alpha = parse_num<double>(key, val);
        else if (key == "interval") c.interval = parse_num<int>(key, val);
        else if (key == "steps") c.steps = parse_num<int>(key, val);
        else if (key == "selection") c.selection = val;
        else if (key == "canonicalizer") c.canonicalizer = val;
        else if (key == "beta") c.beta = (val == "none") ? std::nullopt
                                                         : std::optional<double>(parse_num<double>(key, val));
        else if (key == "grid") c.grid = parse_num<int>(key, val);
        else if (key == "refine") c.refine = parse_bool(key, val);
        else if (key == "rotation_order") c.rotation_order = parse_num<int>(key, val);
        else if (key == "scales") c.scales = val;
        else if (key == "template_in") c.template_in = val;
        else throw ConfigError("unknown config field '" + key + "'");
    }

    if (!(c.class_similarity >= 0.0 && c.class_similarity < 1.0))
        throw ConfigError("config field 'class_similarity': must lie in [0, 1)");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0))
        throw ConfigError("config field 'alpha': must lie in (0, 1]");
    if (c.interval < 0) throw ConfigError("config field 'interval': must be >= 0");
    if (c.steps < 0) throw ConfigError("config field 'steps': must be >= 0");
    if (c.workers < 1) throw ConfigError("config field 'workers': must be >= 1");
    if (c.grid < 1) throw ConfigError("config field 'grid': must be >= 1");
    if (c.rotation_order < 1) throw ConfigError("config field 'rotation_order': must be >= 1");
    if (c.beta && !(*c.beta > 0.0 && *c.beta < 1.0))
        throw ConfigError("config field 'beta': must lie in (0, 1) or be 'none'");
    if (c.selection != "toploss" && c.selection != "random")
        throw ConfigError("config field 'selection': must be 'toploss' or 'random'");
    return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "# galign run config\n";
    os << "seed = " << seed << "\n";
    os << "workers = " << workers << "\n";
    os << "out_dir = " << out_dir << "\n";
    os << "plot = " << (plot ? "true" : "false") << "\n";
    os << "dataset = " << dataset << "\n";
    os << "manifold = " << manifold << "\n";
    os << "classes = " << classes << "\n";
    os << "per_class = " << per_class << "\n";
    os << "pose = " << pose << "\n";
    os << "shape_points = " << shape_points << "\n";
    os << "shape_jitter = " << fmt_double(shape_jitter) << "\n";
    os << "class_similarity = " << fmt_double(class_similarity) << "\n";
    os << "alpha = " << fmt_double(alpha) << "\n";
    os << "interval = " << interval << "\n";
    os << "steps = " << steps << "\n";
    os << "selection = " << selection << "\n";
    os << "canonicalizer = " << canonicalizer << "\n";
    os << "beta = " << (beta ? fmt_double(*beta) : "none") << "\n";
    os << "grid = " << grid << "\n";
    os << "refine = " << (refine ? "true" : "false") << "\n";
    os << "rotation_order = " << rotation_order << "\n";
    os << "scales = " << scales << "\n";
    os << "template_in = " << template_in << "\n";
    return os.str();
}

BootstrapConfig RunConfig::bootstrap() const {
    BootstrapConfig b;
    b.alpha = alpha;
    b.interval = interval;
    b.steps = steps;
    b.selection = selection_mode();
    b.seed = seed;
    b.grid_resolution = grid;
    b.refine = refine;
    b.workers = workers;
    b.beta_control = beta;
    return b;
}

Selection RunConfig::selection_mode() const {
    return selection == "random" ? Selection::Random : Selection::TopLoss;
}

std::vector<double> RunConfig::scale_list() const {
    std::vector<double> out;
    std::stringstream ss(scales);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("config field 'scales': bad scale '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("config field 'scales': empty list");
    return out;
}

std::string RunConfig::resolved_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("GALIGN_OUT"); env && *env) return env;
    return ".";
}

}  // namespace galign
