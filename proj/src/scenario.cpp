#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lzsetkit/afd.hpp"
#include "lzsetkit/scenario.hpp"

namespace lzsetkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void log_line(const std::string& msg) {
    static const bool enabled = [] {
        const char* v = std::getenv("LZ_SETKIT_LOG");
        return v != nullptr && v[0] != '\0' && std::string(v) != "0";
    }();
    if (enabled) std::cerr << "[lzset] " << msg << "\n";
}

Matrix json_matrix(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) throw std::invalid_argument("matrix rows must be arrays");
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw std::invalid_argument("matrix rows must have equal length");
        for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vector json_vector(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

LineZonotope parse_set(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("set description needs a \"kind\" field");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zonotope")
        return lz_zonotope(json_matrix(j.at("generators")), json_vector(j.at("center")));
    if (kind == "box") {
        const Vector c = json_vector(j.at("center"));
        const Vector h = json_vector(j.at("half_widths"));
        require(c.size() == h.size(), "box: center/half_widths size mismatch");
        return lz_zonotope(Matrix(h.asDiagonal()), c);
    }
    if (kind == "singleton") return lz_singleton(json_vector(j.at("center")));
    if (kind == "realspace") return lz_realspace(j.at("dim").get<Index>());
    if (kind == "constrained")
        return lz_constrained_zonotope(json_matrix(j.at("generators")),
                                       json_vector(j.at("center")),
                                       json_matrix(j.at("A")), json_vector(j.at("b")));
    if (kind == "line") {
        LineZonotope z;
        z.M = json_matrix(j.at("M"));
        z.G = json_matrix(j.at("G"));
        z.c = json_vector(j.at("c"));
        z.S = json_matrix(j.at("S"));
        z.A = json_matrix(j.at("A"));
        z.b = json_vector(j.at("b"));
        z.validate();
        return z;
    }
    throw std::invalid_argument("unknown set kind: " + kind);
}

DescriptorModel parse_model(const json& j) {
    DescriptorModel m;
    m.E = json_matrix(j.at("E"));
    m.A = json_matrix(j.at("A"));
    m.B = json_matrix(j.at("B"));
    m.Bw = json_matrix(j.at("Bw"));
    m.C = json_matrix(j.at("C"));
    m.D = json_matrix(j.at("D"));
    m.Dv = json_matrix(j.at("Dv"));
    m.validate();
    return m;
}

json load_scenario(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file: " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::runtime_error("scenario must be a JSON object with a string \"kind\"");
    return j;
}

namespace {

std::vector<Vector> parse_sequences(const json& j, Index expect_len, const char* what) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(std::string(what) + " must be a non-empty array");
    std::vector<Vector> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        out.push_back(json_vector(e));
        if (expect_len >= 0 && out.back().size() != expect_len)
            throw std::invalid_argument(std::string(what) + ": entry size mismatch");
    }
    return out;
}

EstimatorMethod parse_estimator_method(const std::string& s) {
    if (s == "lz") return EstimatorMethod::kLineZonotope;
    if (s == "cz") return EstimatorMethod::kConstrainedZonotope;
    throw std::invalid_argument("unknown method: " + s + " (expected lz or cz)");
}

AfdMethod parse_afd_method(const std::string& s) {
    if (s == "lz") return AfdMethod::kLineZonotope;
    if (s == "cz") return AfdMethod::kConstrainedZonotope;
    throw std::invalid_argument("unknown method: " + s + " (expected lz or cz)");
}

FaultModelSet parse_fault_set(const json& sc) {
    FaultModelSet f;
    for (const auto& mj : sc.at("models")) f.models.push_back(parse_model(mj));
    require(!f.models.empty(), "afd scenario: empty model list");
    f.X0 = parse_set(sc.at("X0"));
    f.W = parse_set(sc.at("W"));
    f.V = parse_set(sc.at("V"));
    f.U = parse_set(sc.at("U"));
    f.N = sc.at("N").get<Index>();
    f.u0 = json_vector(sc.at("u0"));
    const Index nseq = (f.N + 1) * f.models.front().nu();
    f.utilde = json_vector(sc.at("utilde"));
    if (sc.contains("rcost_diag")) {
        const Vector d = json_vector(sc.at("rcost_diag"));
        require(d.size() == nseq, "afd scenario: rcost_diag length mismatch");
        f.Rcost = Matrix(d.asDiagonal());
    } else {
        f.Rcost = Matrix::Identity(nseq, nseq);
    }
    f.eps = sc.value("eps", 1e-4);
    f.validate();
    return f;
}

struct AfdSetup {
    FaultModelSet f;
    AfdMethod method = AfdMethod::kLineZonotope;
    LineZonotope XA;
    bool has_xa = false;
    DesignOptions opts;
};

AfdSetup parse_afd_setup(const json& sc, const RunOverrides& ov) {
    AfdSetup s;
    s.f = parse_fault_set(sc);
    std::string method = sc.value("method", std::string("lz"));
    if (ov.method) method = *ov.method;
    s.method = parse_afd_method(method);
    if (sc.contains("XA")) {
        s.XA = parse_set(sc.at("XA"));
        s.has_xa = true;
    }
    if (s.method == AfdMethod::kConstrainedZonotope && !s.has_xa)
        throw std::invalid_argument("afd scenario: method cz requires an XA set");
    if (sc.contains("limits")) {
        const auto& lj = sc.at("limits");
        s.opts.limits.max_generators = lj.value("max_generators", Index{0});
        s.opts.limits.max_constraints = lj.value("max_constraints", Index{2});
    }
    s.opts.generator_cap_factor = sc.value("generator_cap_factor", 1.6);
    s.opts.jobs = ov.jobs;
    return s;
}

json design_to_json(const DesignResult& res, const FaultModelSet& f) {
    json out;
    out["status"] = res.status == MilpStatus::kOptimal
                        ? "optimal"
                        : (res.status == MilpStatus::kInfeasible ? "infeasible"
                                                                 : "node-limit");
    out["nodes_explored"] = res.nodes_explored;
    if (res.status == MilpStatus::kOptimal) {
        out["cost"] = res.cost;
        json ub = json::array();
        for (Index k = 0; k < res.ubar.size(); ++k) ub.push_back(res.ubar(k));
        out["ubar"] = ub;
        json kappas = json::array();
        std::size_t q = 0;
        for (std::size_t i = 0; i < f.models.size(); ++i)
            for (std::size_t j = i + 1; j < f.models.size(); ++j, ++q)
                kappas.push_back({{"i", i}, {"j", j}, {"kappa", res.kappa[q]}});
        out["kappa"] = kappas;
    }
    return out;
}

std::string kappa_csv(const std::vector<double>& kappa, std::size_t n_models) {
    std::ostringstream csv;
    csv << "i,j,kappa\n";
    std::size_t q = 0;
    for (std::size_t i = 0; i < n_models; ++i)
        for (std::size_t j = i + 1; j < n_models; ++j, ++q)
            csv << i << "," << j << "," << format_double(kappa[q]) << "\n";
    return csv.str();
}

}  // namespace

int run_estimate(const json& sc, const fs::path& out_dir, const RunOverrides& ov) {
    const DescriptorModel model = parse_model(sc.at("model"));
    const LineZonotope W = parse_set(sc.at("W"));
    const LineZonotope V = parse_set(sc.at("V"));
    const Vector x0 = json_vector(sc.at("x0"));
    require(x0.size() == model.n(), "estimate scenario: x0 size mismatch");
    const auto inputs = parse_sequences(sc.at("inputs"), model.nu(), "inputs");
    std::uint64_t seed = sc.value("noise_seed", std::uint64_t{1});
    if (ov.seed) seed = *ov.seed;

    EstimatorConfig base_cfg;
    if (sc.contains("limits")) {
        const auto& lj = sc.at("limits");
        base_cfg.limits.max_generators = lj.value("max_generators", Index{30});
        base_cfg.limits.max_constraints = lj.value("max_constraints", Index{5});
        base_cfg.limits.minimize_lines = true;
    }

    log_line("estimate: simulating " + std::to_string(inputs.size()) + " steps");
    const SvdTransform tr = svd_transform(model);
    const SimulationResult sim = simulate(model, tr, W, V, x0, inputs, seed);

    struct MethodRun {
        std::string name;
        std::vector<EstimatorState> states;
    };
    std::vector<MethodRun> runs;
    for (const auto& mj : sc.at("methods")) {
        const std::string name = mj.at("name").get<std::string>();
        if (ov.method && *ov.method != name) continue;
        EstimatorConfig cfg = base_cfg;
        cfg.method = parse_estimator_method(name);
        if (mj.contains("XA")) cfg.XA = parse_set(mj.at("XA"));
        const LineZonotope X0 = parse_set(mj.at("X0"));
        log_line("estimate: running method " + name);
        MethodRun run;
        run.name = name;
        run.states = estimate_run(model, X0, W, V, inputs, sim.outputs, cfg);
        runs.push_back(std::move(run));
    }
    if (runs.empty()) throw std::invalid_argument("estimate scenario: no method selected");

    std::ostringstream radii;
    radii << "k,method,radius,empty,reduce_seconds\n";
    std::ostringstream hulls;
    hulls << "k,method,dim,lo,hi\n";
    json summary;
    summary["kind"] = "estimate";
    summary["steps"] = inputs.size();
    for (const auto& run : runs) {
        Index first_finite = -1;
        Index first_empty = -1;
        double reduce_total = 0.0;
        for (const auto& st : run.states) {
            radii << st.k << "," << run.name << "," << format_double(st.radius_x) << ","
                  << (st.empty ? 1 : 0) << "," << format_double(st.reduce_seconds)
                  << "\n";
            reduce_total += st.reduce_seconds;
            if (st.empty) {
                if (first_empty < 0) first_empty = st.k;
                continue;
            }
            if (std::isfinite(st.radius_x) && first_finite < 0) first_finite = st.k;
            const Interval hull = interval_hull(st.Xhat);
            for (Index d = 0; d < hull.dim(); ++d)
                hulls << st.k << "," << run.name << "," << d << ","
                      << format_double(hull.lower(d)) << ","
                      << format_double(hull.upper(d)) << "\n";
        }
        json ms;
        ms["first_finite_k"] = first_finite;
        ms["first_empty_k"] = first_empty;
        ms["reduce_seconds_total"] = reduce_total;
        const auto& last = run.states.back();
        ms["final_radius"] = last.empty ? json() : json(last.radius_x);
        ms["final_empty"] = last.empty;
        summary["methods"][run.name] = ms;
    }

    fs::create_directories(out_dir);
    write_text_atomic(out_dir / "radii.csv", radii.str());
    write_text_atomic(out_dir / "hulls.csv", hulls.str());
    write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    std::cout << "estimate: wrote radii.csv, hulls.csv, summary.json to " << out_dir
              << "\n";
    return kExitOk;
}

int run_afd_design(const json& sc, const fs::path& out_dir, const RunOverrides& ov) {
    AfdSetup s = parse_afd_setup(sc, ov);
    log_line("afd-design: " + std::to_string(s.f.models.size()) + " models, N = " +
             std::to_string(s.f.N));
    const DesignResult res =
        design_input(s.f, s.method, s.has_xa ? &s.XA : nullptr, s.opts);

    fs::create_directories(out_dir);
    write_text_atomic(out_dir / "u.json", design_to_json(res, s.f).dump(2) + "\n");
    if (res.status != MilpStatus::kOptimal) {
        std::cout << "afd-design: no separating input ("
                  << (res.status == MilpStatus::kInfeasible ? "infeasible" : "node limit")
                  << ")\n";
        return kExitNoResult;
    }
    write_text_atomic(out_dir / "kappa.csv", kappa_csv(res.kappa, s.f.models.size()));
    std::cout << "afd-design: cost " << format_double(res.cost) << ", "
              << res.kappa.size() << " pairs separated; wrote u.json, kappa.csv to "
              << out_dir << "\n";
    return kExitOk;
}

int run_afd_verify(const json& sc, const fs::path& out_dir, const RunOverrides& ov) {
    AfdSetup s = parse_afd_setup(sc, ov);
    const Index nseq = (s.f.N + 1) * s.f.models.front().nu();
    Vector ubar;
    if (sc.contains("ubar")) {
        ubar = json_vector(sc.at("ubar"));
        require(ubar.size() == nseq, "afd-verify: ubar length mismatch");
    } else {
        log_line("afd-verify: no ubar given, designing first");
        const DesignResult res =
            design_input(s.f, s.method, s.has_xa ? &s.XA : nullptr, s.opts);
        if (res.status != MilpStatus::kOptimal) {
            std::cout << "afd-verify: design produced no input\n";
            return kExitNoResult;
        }
        fs::create_directories(out_dir);
        write_text_atomic(out_dir / "u.json", design_to_json(res, s.f).dump(2) + "\n");
        ubar = res.ubar;
    }

    const int samples = sc.value("samples", 500);
    std::uint64_t seed = sc.value("seed", std::uint64_t{1});
    if (ov.seed) seed = *ov.seed;
    log_line("afd-verify: " + std::to_string(samples) + " samples per model");
    const DiagnosisCheck check = verify_diagnosis(
        s.f, ubar, samples, seed, s.method, s.has_xa ? &s.XA : nullptr, ov.jobs);

    const int nm = static_cast<int>(s.f.models.size());
    std::ostringstream inc;
    inc << "true_model,tube_model,count,samples\n";
    bool diag_perfect = true;
    for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nm; ++j) {
            inc << i << "," << j << "," << check.inclusion(i, j) << "," << samples
                << "\n";
            if (i == j && check.inclusion(i, j) != samples) diag_perfect = false;
            if (i != j && check.inclusion(i, j) != 0) diag_perfect = false;
        }
    }
    bool all_separated = true;
    for (const bool sep : check.pair_separated) all_separated = all_separated && sep;

    json summary;
    summary["kind"] = "afd-verify";
    summary["samples_per_model"] = samples;
    summary["diag_perfect"] = diag_perfect;
    summary["all_pairs_separated"] = all_separated;
    json ub = json::array();
    for (Index k = 0; k < ubar.size(); ++k) ub.push_back(ubar(k));
    summary["ubar"] = ub;

    fs::create_directories(out_dir);
    write_text_atomic(out_dir / "inclusion.csv", inc.str());
    write_text_atomic(out_dir / "kappa.csv", kappa_csv(check.kappa, s.f.models.size()));
    write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    std::cout << "afd-verify: diagnosis " << (diag_perfect ? "perfect" : "imperfect")
              << ", pairs " << (all_separated ? "all separated" : "not all separated")
              << "; wrote inclusion.csv, kappa.csv, summary.json to " << out_dir << "\n";
    return kExitOk;
}

int run_sets_demo(const json& sc, const fs::path& out_dir, const RunOverrides& ov) {
    (void)ov;
    const std::string variant = sc.at("variant").get<std::string>();
    json out;
    out["kind"] = "sets-demo";
    out["variant"] = variant;

    if (variant == "intersection") {
        LineZonotope z = parse_set(sc.at("set"));
        out["input"] = to_json(z);
        for (const auto& strip_j : sc.at("strips")) {
            Strip strip;
            strip.rho = json_vector(strip_j.at("rho"));
            strip.d = strip_j.at("d").get<double>();
            strip.sigma = strip_j.at("sigma").get<double>();
            const Matrix R = strip_j.contains("R") ? json_matrix(strip_j.at("R"))
                                                   : Matrix(Matrix::Identity(
                                                         strip.rho.size(), z.dim()));
            z = generalized_intersection(z, lz_from_strip(strip), R);
        }
        out["result"] = to_json(z);
        out["empty"] = is_empty(z);
    } else if (variant == "strip") {
        Strip strip;
        strip.rho = json_vector(sc.at("rho"));
        strip.d = sc.at("d").get<double>();
        strip.sigma = sc.at("sigma").get<double>();
        out["result"] = to_json(lz_from_strip(strip));
    } else if (variant == "descriptor-chain") {
        // Autonomous descriptor propagation: S_{k+1} = {x : E x in A * S_k}.
        const Matrix E = json_matrix(sc.at("E"));
        const Matrix A = json_matrix(sc.at("A"));
        LineZonotope set = parse_set(sc.at("X0"));
        const Index steps = sc.at("steps").get<Index>();
        const Index n = set.dim();
        json chain = json::array();
        std::ostringstream hulls;
        hulls << "k,dim,lo,hi\n";
        for (Index k = 0; k <= steps; ++k) {
            json entry;
            entry["k"] = k;
            entry["set"] = to_json(set);
            chain.push_back(entry);
            const Interval hull = interval_hull(set);
            for (Index d = 0; d < n; ++d)
                hulls << k << "," << d << "," << format_double(hull.lower(d)) << ","
                      << format_double(hull.upper(d)) << "\n";
            if (k < steps)
                set = generalized_intersection(lz_realspace(n), linear_map(A, set), E);
        }
        out["steps"] = chain;
        fs::create_directories(out_dir);
        write_text_atomic(out_dir / "hulls.csv", hulls.str());
    } else {
        throw std::invalid_argument("unknown sets-demo variant: " + variant);
    }

    fs::create_directories(out_dir);
    write_text_atomic(out_dir / "sets.json", out.dump(2) + "\n");
    std::cout << "sets-demo: wrote sets.json to " << out_dir << "\n";
    return kExitOk;
}

int run_scenario(const fs::path& scenario_file, const fs::path& out_dir,
                 const RunOverrides& ov) {
    json sc;
    try {
        sc = load_scenario(scenario_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    const std::string kind = sc.at("kind").get<std::string>();
    try {
        if (kind == "estimate") return run_estimate(sc, out_dir, ov);
        if (kind == "afd-design") return run_afd_design(sc, out_dir, ov);
        if (kind == "afd-verify") return run_afd_verify(sc, out_dir, ov);
        if (kind == "sets-demo") return run_sets_demo(sc, out_dir, ov);
        std::cerr << "error: unknown scenario kind: " << kind << "\n";
        return kExitBadInput;
    } catch (const json::exception& e) {
        std::cerr << "error: scenario schema: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace lzsetkit
