// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/experiment.hpp"

#include "hyperscar/dynamics.hpp"
#include "hyperscar/errors.hpp"
#include "hyperscar/hda.hpp"
#include "hyperscar/spectral.hpp"
#include "hyperscar/subspace.hpp"
#include "hyperscar/symmetry.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace hyperscar {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError("'" + key + "' expects a finite number, got '" + v + "'");
    }
    return x;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
    Int x{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    }
    return x;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k > 0) out += ", ";
        out += format_double(xs[k]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k > 0) out += ", ";
        out += std::to_string(xs[k]);
    }
    return out;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ConfigError("cannot write " + path.string());
        for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
        out_ << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::string stem(const std::string& prefix, std::size_t index, std::size_t count) {
    if (count <= 1) return prefix;
    char buf[16];
    std::snprintf(buf, sizeof buf, "_p%03zu", index);
    return prefix + buf;
}

// Runs fn(0..count-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t k = next.fetch_add(1);
                if (k >= count) return;
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Writes one output per index and returns the names in index order.
std::vector<std::string> collect(std::vector<std::vector<std::string>>& parts) {
    std::vector<std::string> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::string default_label(const LatticeSpec& spec) {
    switch (spec.unit_kind) {
        case UnitKind::dimer: return "C";
        case UnitKind::tetramer: return "C_x";
        case UnitKind::octamer: return "C_star";
    }
    return "C";
}

json towers_json(const std::vector<Tower>& towers) {
    json arr = json::array();
    for (const Tower& t : towers) {
        arr.push_back({{"center", t.center},
                       {"weight", t.weight},
                       {"peak_energy", t.peak_energy},
                       {"peak_weight", t.peak_weight},
                       {"members", t.members}});
    }
    return arr;
}

double sweep_value(const ExperimentConfig& c) {
    const std::string& p = c.sweep_parameter;
    if (p == "J0") return c.j0;
    if (p == "J1") return c.j1;
    if (p == "J3") return c.j3;
    if (p == "N") return c.n;
    if (p == "seed") return static_cast<double>(c.seed);
    return 0.0;
}

ExperimentConfig with_seed(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.seed) cfg.seed = *opts.seed;
    return cfg;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    ExperimentConfig c;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool versioned = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string v = trim(std::string_view(body).substr(eq + 1));
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        if (!versioned && key != "version") throw ConfigError(where + "the first setting must be 'version = 1'");
        try {
            if (key == "version") {
                c.version = parse_int<int>(key, v);
                if (c.version != 1) throw ConfigError("unsupported config version " + v);
                versioned = true;
            } else if (key == "model") {
                c.model = v;
            } else if (key == "N") {
                c.n = parse_int<int>(key, v);
            } else if (key == "Nx") {
                c.nx = parse_int<int>(key, v);
            } else if (key == "Ny") {
                c.ny = parse_int<int>(key, v);
            } else if (key == "Nz") {
                c.nz = parse_int<int>(key, v);
            } else if (key == "J0") {
                c.j0 = parse_double(key, v);
            } else if (key == "J1") {
                c.j1 = parse_double(key, v);
            } else if (key == "J3") {
                c.j3 = parse_double(key, v);
            } else if (key == "boundary") {
                if (v == "obc") {
                    c.boundary = Boundary::open;
                } else if (v == "pbc") {
                    c.boundary = Boundary::periodic;
                } else {
                    throw ConfigError("boundary must be obc or pbc");
                }
            } else if (key == "seed") {
                c.seed = parse_int<std::uint64_t>(key, v);
            } else if (key == "lattice") {
                c.lattice_file = v;
            } else if (key == "initial") {
                c.initial = v;
            } else if (key == "initial_bits") {
                c.initial_bits = v;
            } else if (key == "t_max") {
                c.t_max = parse_double(key, v);
            } else if (key == "t_points") {
                c.t_points = parse_int<std::size_t>(key, v);
            } else if (key == "random_states") {
                c.random_states = parse_int<std::size_t>(key, v);
            } else if (key == "cluster_seeds") {
                c.cluster_seeds = parse_int<std::size_t>(key, v);
            } else if (key == "sizes") {
                c.sizes.clear();
                for (const auto& item : split_list(v)) c.sizes.push_back(parse_int<int>(key, item));
            } else if (key == "sweep.parameter") {
                c.sweep_parameter = v;
            } else if (key == "sweep.values") {
                c.sweep_values.clear();
                for (const auto& item : split_list(v)) c.sweep_values.push_back(parse_double(key, item));
            } else if (key == "hda.eta") {
                c.hda_eta = parse_double(key, v);
            } else if (key == "hda.points") {
                c.hda_points = parse_int<std::size_t>(key, v);
            } else if (key == "hda.half_width") {
                c.hda_half_width = parse_double(key, v);
            } else if (key == "hda.tol") {
                c.hda_tol = parse_double(key, v);
            } else if (key == "hda.damping") {
                c.hda_damping = parse_double(key, v);
            } else if (key == "hda.max_iters") {
                c.hda_max_iters = parse_int<int>(key, v);
            } else if (key == "eigen_cap") {
                c.eigen_cap = parse_int<std::size_t>(key, v);
            } else if (key == "out") {
                c.out = v;
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            throw ConfigError(msg.rfind("line ", 0) == 0 ? msg : where + msg);
        }
    }
    if (!versioned) throw ConfigError("config is missing 'version = 1'");
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream o;
    o << "version = " << version << '\n';
    o << "model = " << model << '\n';
    o << "N = " << n << '\n';
    o << "Nx = " << nx << '\n';
    o << "Ny = " << ny << '\n';
    o << "Nz = " << nz << '\n';
    o << "J0 = " << format_double(j0) << '\n';
    o << "J1 = " << format_double(j1) << '\n';
    o << "J3 = " << format_double(j3) << '\n';
    o << "boundary = " << to_string(boundary) << '\n';
    o << "seed = " << seed << '\n';
    if (!lattice_file.empty()) o << "lattice = " << lattice_file << '\n';
    if (initial) o << "initial = " << *initial << '\n';
    if (initial_bits) o << "initial_bits = " << *initial_bits << '\n';
    o << "t_max = " << format_double(t_max) << '\n';
    o << "t_points = " << t_points << '\n';
    o << "random_states = " << random_states << '\n';
    o << "cluster_seeds = " << cluster_seeds << '\n';
    if (!sizes.empty()) o << "sizes = " << join_ints(sizes) << '\n';
    if (!sweep_parameter.empty()) o << "sweep.parameter = " << sweep_parameter << '\n';
    if (!sweep_values.empty()) o << "sweep.values = " << join_doubles(sweep_values) << '\n';
    o << "hda.eta = " << format_double(hda_eta) << '\n';
    o << "hda.points = " << hda_points << '\n';
    o << "hda.half_width = " << format_double(hda_half_width) << '\n';
    o << "hda.tol = " << format_double(hda_tol) << '\n';
    o << "hda.damping = " << format_double(hda_damping) << '\n';
    o << "hda.max_iters = " << hda_max_iters << '\n';
    o << "eigen_cap = " << eigen_cap << '\n';
    o << "out = " << out << '\n';
    return o.str();
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> models{"ssh", "comb", "random-cluster", "tetramer-2d", "octamer-3d"};
    if (!models.contains(model)) throw ConfigError("unknown model '" + model + "'");
    if (initial && initial_bits) throw ConfigError("set at most one of 'initial' and 'initial_bits'");
    if (!(t_max > 0.0) || t_points < 2) throw ConfigError("time grid needs t_max > 0 and t_points >= 2");
    static const std::set<std::string> params{"", "J0", "J1", "J3", "N", "seed"};
    if (!params.contains(sweep_parameter)) throw ConfigError("unknown sweep parameter '" + sweep_parameter + "'");
    if (sweep_parameter.empty() != sweep_values.empty()) {
        throw ConfigError("sweep.parameter and sweep.values must be given together");
    }
    if (hda_eta < 0.0 || hda_half_width < 0.0) throw ConfigError("hda.eta and hda.half_width must be non-negative");
    if (hda_points < 2) throw ConfigError("hda.points must be at least 2");
    if (!(hda_damping > 0.0 && hda_damping <= 1.0)) throw ConfigError("hda.damping must lie in (0, 1]");
    if (boundary == Boundary::periodic && model != "ssh") throw ConfigError("pbc is only available for the ssh model");
}

ExperimentConfig ExperimentConfig::with_parameter(const std::string& name, double value) const {
    ExperimentConfig c = *this;
    if (name == "J0") {
        c.j0 = value;
    } else if (name == "J1") {
        c.j1 = value;
    } else if (name == "J3") {
        c.j3 = value;
    } else if (name == "N") {
        c.n = static_cast<int>(std::lround(value));
    } else if (name == "seed") {
        c.seed = static_cast<std::uint64_t>(std::llround(value));
    } else {
        throw ConfigError("unknown sweep parameter '" + name + "'");
    }
    return c;
}

std::vector<ExperimentConfig> ExperimentConfig::sweep_points() const {
    if (sweep_values.empty()) return {*this};
    std::vector<ExperimentConfig> out;
    for (double v : sweep_values) out.push_back(with_parameter(sweep_parameter, v));
    return out;
}

LatticeSpec ExperimentConfig::build_lattice() const {
    if (!lattice_file.empty()) {
        std::ifstream in(lattice_file);
        if (!in) throw ConfigError("cannot read lattice file " + lattice_file);
        std::stringstream ss;
        ss << in.rdbuf();
        return lattice_from_json(ss.str());
    }
    if (model == "ssh") return build_ssh_chain(n, j0, j1, j3, boundary);
    if (model == "comb") return build_comb(n, j0, j1);
    if (model == "random-cluster") return build_random_cluster(n, j0, j1, seed);
    if (model == "tetramer-2d") return build_tetramer_grid(nx, ny, j0, j1);
    if (model == "octamer-3d") return build_octamer_grid(nx, ny, nz, j0, j1);
    throw ConfigError("unknown model '" + model + "'");
}

std::string ExperimentConfig::initial_label() const {
    if (initial_bits) return "bits_" + *initial_bits;
    return initial.value_or("");
}

FockState ExperimentConfig::initial_state(const LatticeSpec& spec) const {
    if (initial_bits) {
        const std::string& b = *initial_bits;
        if (static_cast<int>(b.size()) != spec.sites) {
            throw ConfigError("initial_bits has " + std::to_string(b.size()) + " digits for " +
                              std::to_string(spec.sites) + " sites");
        }
        std::vector<int> z;
        for (char ch : b) {
            if (ch != '0' && ch != '1') throw ConfigError("initial_bits must contain only 0 and 1");
            z.push_back(ch - '0');
        }
        return FockState::from_occupations(z);
    }
    return collective_state(spec, initial.value_or(default_label(spec)), true);
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 15];
    }
    return out;
}

RunResult run_spectrum(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    const auto points = cfg.sweep_points();
    std::vector<std::vector<std::string>> files(points.size());
    struct Summary {
        double x = 0.0;
        double spacing = std::nan("");
        double r = std::nan("");
        double j0 = 1.0;
        double j1 = 0.0;
        double j3 = 0.0;
    };
    std::vector<Summary> summary(points.size());
    parallel_for(points.size(), opts.threads, [&](std::size_t i) {
        const ExperimentConfig& c = points[i];
        const LatticeSpec spec = c.build_lattice();
        const BasisSector sector(spec.sites, spec.half_filling());
        if (sector.size() > 4 * c.eigen_cap) {
            throw CapacityError("sector dimension " + std::to_string(sector.size()) +
                                " is beyond dense reach even with symmetry blocks; use the dynamics command");
        }
        const SparseHamiltonian h = assemble_hamiltonian(spec, sector);
        const SymmetryGroup group = SymmetryGroup::detect(spec, spec.half_filling());
        const FockState init = c.initial_state(spec);
        const auto cut = half_cut(spec);
        const Bipartition bip(sector, cut);
        const auto rank = sector.rank(init);
        const auto records = eigen_observables(h, sector, group, *rank, &bip, c.eigen_cap);

        const std::string name = stem("spectrum", i, points.size());
        CsvWriter csv(opts.out_dir / (name + ".csv"), {"E [J]", "overlap [1]", "entropy [nats]", "sector"});
        std::vector<OverlapPoint> pts;
        std::vector<std::vector<double>> levels(group.sector_count());
        std::vector<double> all;
        for (const EigenRecord& r : records) {
            csv.row({format_double(r.energy), format_double(r.overlap), format_double(r.entropy),
                     group.sector_label(static_cast<std::size_t>(r.sector))});
            pts.push_back({r.energy, r.overlap});
            levels[static_cast<std::size_t>(r.sector)].push_back(r.energy);
            all.push_back(r.energy);
        }
        json j;
        j["model"] = c.model;
        j["sites"] = spec.sites;
        j["dimension"] = sector.size();
        j["initial"] = init.to_string();
        j["J0"] = c.j0;
        j["J1"] = c.j1;
        j["J3"] = c.j3;
        const GapRatioStats unresolved = mean_gap_ratio(all);
        double weighted = 0.0;
        std::size_t count = 0;
        json per = json::object();
        for (std::size_t b = 0; b < levels.size(); ++b) {
            const GapRatioStats s = mean_gap_ratio(levels[b]);
            per[group.sector_label(b)] = s.ratios > 0 ? json(s.mean) : json(nullptr);
            if (s.ratios > 0) {
                weighted += s.mean * static_cast<double>(s.ratios);
                count += s.ratios;
            }
        }
        const double resolved = count > 0 ? weighted / static_cast<double>(count) : std::nan("");
        j["gap_ratio"] = {{"resolved", resolved}, {"unresolved", unresolved.mean}, {"per_sector", per}};
        summary[i].r = resolved;
        summary[i].x = sweep_value(c);
        summary[i].j0 = c.j0;
        summary[i].j1 = c.j1;
        summary[i].j3 = c.j3;
        try {
            const auto towers = extract_towers(pts, {.threshold = 1e-3, .window = std::abs(c.j0) / 2.0});
            const double e0 = h.element(*rank, *rank);
            const auto near = towers_near(towers, e0, 5);
            j["towers"] = towers_json(towers);
            j["tower_spacing"] = tower_spacing(near);
            summary[i].spacing = tower_spacing(near);
        } catch (const FitError& e) {
            j["towers"] = json::array();
            j["tower_error"] = e.what();
        }
        write_json(opts.out_dir / (name + ".json"), j);
        files[i] = {name + ".csv", name + ".json"};
    });
    RunResult res{collect(files)};
    if (!cfg.sweep_parameter.empty()) {
        CsvWriter csv(opts.out_dir / "gap_ratio.csv", {cfg.sweep_parameter, "r [1]"});
        for (const auto& s : summary) csv.row({format_double(s.x), format_double(s.r)});
        res.files.push_back("gap_ratio.csv");
    }
    std::vector<std::pair<double, double>> samples;
    for (const auto& s : summary) {
        const double x = (s.j1 + s.j3) / s.j0;
        if (std::isfinite(s.spacing) && x >= 0.0 && x <= 1.2) samples.emplace_back(x, s.spacing / s.j0);
    }
    if (cfg.sweep_parameter == "J1" || cfg.sweep_parameter == "J3" || cfg.sweep_parameter == "J0") {
        json fit;
        CsvWriter csv(opts.out_dir / "lambda_fit.csv", {"x [1]", "dE/J0 [1]", "fit [1]"});
        try {
            const TowerFit f = fit_lambda(samples);
            fit = {{"lambda", f.lambda}, {"residual", f.residual}, {"samples", f.samples}};
            for (const auto& [x, y] : samples) csv.row({format_double(x), format_double(y), format_double(f.predict(x))});
        } catch (const FitError& e) {
            fit = {{"error", e.what()}};
            for (const auto& [x, y] : samples) csv.row({format_double(x), format_double(y), ""});
        }
        write_json(opts.out_dir / "lambda_fit.json", fit);
        res.files.push_back("lambda_fit.csv");
        res.files.push_back("lambda_fit.json");
    }
    return res;
}

RunResult run_dynamics(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    const auto points = cfg.sweep_points();
    std::vector<std::vector<std::string>> files(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const ExperimentConfig& c = points[i];
        const LatticeSpec spec = c.build_lattice();
        const BasisSector sector(spec.sites, spec.half_filling());
        const SparseHamiltonian h = assemble_hamiltonian(spec, sector);
        const FockState init = c.initial_state(spec);
        std::vector<FockState> exclude;
        for (const auto& [label, s] : collective_states(spec, true)) exclude.push_back(s);
        const auto randoms = random_fock_states(sector, c.random_states, c.seed, exclude);
        std::vector<std::pair<std::string, FockState>> states{{"initial", init}};
        for (std::size_t k = 0; k < randoms.size(); ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "random_%03zu", k);
            states.emplace_back(buf, randoms[k]);
        }
        const auto times = time_grid(c.t_max, c.t_points);
        const Bipartition bip(sector, half_cut(spec));
        const std::string name = stem("dynamics", i, points.size());
        std::vector<DynamicsTrace> traces(states.size());
        parallel_for(states.size(), opts.threads, [&](std::size_t k) {
            EvolveOptions eo;
            eo.cut = &bip;
            traces[k] = evolve(h, basis_vector(sector, states[k].second), times, eo);
            CsvWriter csv(opts.out_dir / (name + "_" + states[k].first + ".csv"), {"t [1/J1]", "F [1]", "S [nats]"});
            for (std::size_t t = 0; t < times.size(); ++t) {
                csv.row({format_double(times[t]), format_double(traces[k].fidelity[t]),
                         format_double(traces[k].entropy[t])});
            }
        });
        json j;
        j["model"] = c.model;
        j["sites"] = spec.sites;
        j["dimension"] = sector.size();
        j["initial"] = init.to_string();
        const double de = revival_spacing(h, sector, init, spec);
        j["revival_spacing"] = de;
        try {
            const RevivalReport rep = first_revival(traces[0], de, spec.sites);
            j["revival"] = {{"t1", rep.t1}, {"F1", rep.f1}, {"log_density", rep.log_density}};
        } catch (const ContractError& e) {
            j["revival"] = nullptr;
            j["revival_error"] = e.what();
        }
        json rnd = json::array();
        for (std::size_t k = 1; k < states.size(); ++k) {
            const auto& f = traces[k].fidelity;
            const std::size_t from = f.size() * 3 / 4;
            double mean = 0.0;
            double peak = 0.0;
            for (std::size_t t = from; t < f.size(); ++t) {
                mean += f[t];
                peak = std::max(peak, f[t]);
            }
            mean /= static_cast<double>(f.size() - from);
            rnd.push_back({{"state", states[k].second.to_string()}, {"late_mean_F", mean}, {"late_max_F", peak}});
        }
        j["random_states"] = rnd;
        j["inverse_dimension"] = 1.0 / static_cast<double>(sector.size());
        double drift = 0.0;
        for (const auto& tr : traces) drift = std::max(drift, tr.norm_drift);
        j["max_norm_drift"] = drift;
        write_json(opts.out_dir / (name + ".json"), j);
        for (const auto& [label, s] : states) files[i].push_back(name + "_" + label + ".csv");
        files[i].push_back(name + ".json");
    }
    return {collect(files)};
}

RunResult run_scaling(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    if (cfg.sizes.empty()) throw ConfigError("scaling needs 'sizes'");
    ScalingParams p;
    if (cfg.model == "ssh") {
        p.family = Geometry::ssh;
    } else if (cfg.model == "comb") {
        p.family = Geometry::comb;
    } else if (cfg.model == "random-cluster") {
        p.family = Geometry::random_cluster;
    } else {
        throw ConfigError("scaling supports the ssh, comb and random-cluster models");
    }
    p.j0 = cfg.j0;
    p.j1 = cfg.j1;
    p.j3 = cfg.j3;
    p.boundary = cfg.boundary;
    p.seeds = cfg.cluster_seeds;
    p.seed = cfg.seed;
    std::vector<ScalingPoint> pts(cfg.sizes.size());
    parallel_for(cfg.sizes.size(), opts.threads, [&](std::size_t k) {
        const int size = cfg.sizes[k];
        pts[k] = scaling_sweep(p, std::span<const int>(&size, 1)).front();
    });
    CsvWriter csv(opts.out_dir / "scaling.csv", {"size", "1/L [1]", "lnF1/L [1]", "stderr [1]", "ln(1/D)/L [1]",
                                                 "t1 [1/J1]", "F1 [1]", "samples"});
    for (const auto& s : pts) {
        csv.row({std::to_string(s.size), format_double(s.inv_sites), format_double(s.log_density),
                 format_double(s.std_error), format_double(s.thermal), format_double(s.t1), format_double(s.f1),
                 std::to_string(s.samples)});
    }
    return {{"scaling.csv"}};
}

RunResult run_hda(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    const auto points = cfg.sweep_points();
    std::vector<std::vector<std::string>> files(points.size());
    parallel_for(points.size(), opts.threads, [&](std::size_t i) {
        const ExperimentConfig& c = points[i];
        const LatticeSpec spec = c.build_lattice();
        const HypercubeModel model = hypercube_model(spec, 4096);
        const FockState init = c.initial_state(spec);
        const std::size_t probe = model.index_of(init.bits);
        HdaConfig hc = HdaConfig::defaults(spec.unit_count(), c.j0);
        if (c.hda_eta > 0.0) hc.eta = c.hda_eta;
        const double half = c.hda_half_width > 0.0 ? c.hda_half_width : std::abs(c.j0) * (spec.unit_count() + 2);
        hc.grid.resize(c.hda_points);
        for (std::size_t k = 0; k < c.hda_points; ++k) {
            hc.grid[k] = -half + 2.0 * half * static_cast<double>(k) / static_cast<double>(c.hda_points - 1);
        }
        hc.tol = c.hda_tol;
        hc.damping = c.hda_damping;
        hc.max_iters = c.hda_max_iters;
        const DysonSolution sol = solve_dyson(model.h, model.gamma, hc);
        const HdaResult res = spectral_density(model.h, sol, hc, {probe});
        const std::string name = stem("hda", i, points.size());
        {
            CsvWriter csv(opts.out_dir / (name + ".csv"), {"E [J]", "A [1/J]", "converged"});
            for (std::size_t k = 0; k < res.grid.size(); ++k) {
                csv.row({format_double(res.grid[k]), format_double(res.dos[0][k]), res.converged[k] ? "1" : "0"});
            }
        }
        json j;
        j["model"] = c.model;
        j["hyper_dimension"] = model.dimension();
        j["probe"] = init.to_string();
        j["eta"] = hc.eta;
        j["converged_fraction"] = res.converged_fraction();
        j["sum_rule"] = sum_rule(res, 0);
        json peaks = json::array();
        std::vector<Peak> pk;
        if (res.converged_fraction() >= 0.9) pk = tower_peaks(res, 0);
        for (const Peak& p : pk) peaks.push_back({{"energy", p.energy}, {"height", p.height}});
        j["peaks"] = peaks;
        const BasisSector sector(spec.sites, spec.half_filling());
        if (sector.size() <= c.eigen_cap) {
            const SparseHamiltonian h = assemble_hamiltonian(spec, sector);
            const SymmetryGroup group = SymmetryGroup::detect(spec, spec.half_filling());
            const auto records = eigen_observables(h, sector, group, *sector.rank(init), nullptr, c.eigen_cap);
            std::vector<OverlapPoint> ov;
            for (const auto& r : records) ov.push_back({r.energy, r.overlap});
            json cmp = json::array();
            for (const Peak& p : pk) {
                double exact = 0.0;
                for (const auto& o : ov) {
                    if (std::abs(o.energy - p.energy) <= 3.0 * hc.eta) exact += o.weight;
                }
                cmp.push_back({{"energy", p.energy},
                               {"hda_weight", integrated_weight(res, 0, p.energy - 3.0 * hc.eta, p.energy + 3.0 * hc.eta)},
                               {"exact_weight", exact}});
            }
            j["window_weights"] = cmp;
            try {
                j["exact_towers"] = towers_json(extract_towers(ov, {.threshold = 1e-3, .window = std::abs(c.j0) / 2.0}));
            } catch (const FitError& e) {
                j["exact_towers"] = json::array();
                j["tower_error"] = e.what();
            }
        }
        write_json(opts.out_dir / (name + ".json"), j);
        files[i] = {name + ".csv", name + ".json"};
    });
    return {collect(files)};
}

RunResult run_ratio(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    const auto points = cfg.sweep_points();
    struct Row {
        std::string size;
        HoppingSums sums;
        std::string closed;
        std::string match;
        std::string method;
    };
    std::vector<Row> rows(points.size());
    parallel_for(points.size(), opts.threads, [&](std::size_t i) {
        const ExperimentConfig& c = points[i];
        const LatticeSpec spec = c.build_lattice();
        const std::uint64_t dim = hyper_dimension(spec);
        const bool enumerate = dim <= 1000000;
        const HoppingCounts counts = enumerate ? enumerate_hopping_pairs(spec) : count_hopping_pairs(spec);
        Row& r = rows[i];
        r.sums = counts.sums(spec);
        r.method = enumerate ? "enumerated" : "factorized";
        std::optional<RatioShape> shape;
        if ((c.model == "ssh" || c.model == "comb") && c.j3 == 0.0 && c.boundary == Boundary::open && c.lattice_file.empty()) {
            shape = RatioShape{RatioKind::chain, c.n, 1, 1};
            r.size = std::to_string(c.n);
        } else if (c.model == "tetramer-2d" && c.lattice_file.empty()) {
            shape = RatioShape{RatioKind::grid2d, c.nx, c.ny, 1};
            r.size = std::to_string(c.nx) + "x" + std::to_string(c.ny);
        } else if (c.model == "octamer-3d" && c.lattice_file.empty()) {
            shape = RatioShape{RatioKind::grid3d, c.nx, c.ny, c.nz};
            r.size = std::to_string(c.nx) + "x" + std::to_string(c.ny) + "x" + std::to_string(c.nz);
        } else {
            r.size = std::to_string(spec.unit_count());
        }
        if (shape) {
            try {
                r.closed = format_double(ratio_closed_form(*shape, c.j0, c.j1));
                r.match = counts_match_closed_form(counts, *shape) ? "1" : "0";
            } catch (const GeometryError&) {
            }
        }
    });
    CsvWriter csv(opts.out_dir / "ratio.csv", {"model", "size", "theta [J]", "gamma [J]", "ratio [1]",
                                               "closed_form [1]", "match", "method"});
    for (const auto& r : rows) {
        csv.row({cfg.model, r.size, format_double(r.sums.theta), format_double(r.sums.gamma_sum),
                 format_double(r.sums.ratio), r.closed, r.match, r.method});
    }
    CsvWriter md(opts.out_dir / "md_limit.csv", {"M", "numerator", "denominator", "ratio [J0/J1]"});
    for (int m = 1; m <= 6; ++m) {
        const Rational q = ratio_coefficient({RatioKind::md_limit, m, 1, 1});
        md.row({std::to_string(m), std::to_string(q.num), std::to_string(q.den), format_double(q.value())});
    }
    return {{"ratio.csv", "md_limit.csv"}};
}

RunResult run_cluster_gen(const ExperimentConfig& base, const RunOptions& opts) {
    const ExperimentConfig cfg = with_seed(base, opts);
    const LatticeSpec spec = build_random_cluster(cfg.n, cfg.j0, cfg.j1, cfg.seed);
    std::ofstream out(opts.out_dir / "lattice.json");
    if (!out) throw ConfigError("cannot write lattice.json");
    out << to_json(spec) << '\n';
    return {{"lattice.json"}};
}

int run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts) {
    static const std::map<std::string, std::function<RunResult(const ExperimentConfig&, const RunOptions&)>> table{
        {"spectrum", run_spectrum}, {"dynamics", run_dynamics}, {"scaling", run_scaling},
        {"hda", run_hda},           {"ratio", run_ratio},       {"cluster-gen", run_cluster_gen}};
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto it = table.find(command);
        if (it == table.end()) throw ConfigError("unknown subcommand '" + command + "'");
        fs::create_directories(opts.out_dir);
        const ExperimentConfig resolved = with_seed(cfg, opts);
        const RunResult res = it->second(resolved, opts);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json manifest;
        manifest["artifact"] = "hyperscar";
        manifest["version"] = kVersion;
        manifest["command"] = command;
        manifest["config"] = resolved.to_text();
        manifest["threads"] = opts.threads;
        manifest["wall_time_s"] = wall;
        json outputs = json::array();
        for (const auto& f : res.files) {
            outputs.push_back({{"file", f},
                               {"bytes", fs::file_size(opts.out_dir / f)},
                               {"sha256", sha256_file(opts.out_dir / f)}});
        }
        manifest["outputs"] = outputs;
        write_json(opts.out_dir / "manifest.json", manifest);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const GeometryError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CapacityError& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const FitError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
}

}  // namespace hyperscar
