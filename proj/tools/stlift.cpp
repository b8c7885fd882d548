// stlift: lift stencil kernels to predicate summaries and Halide-style text.
//
// Subcommands:
//   lift <file.st>    full pipeline on one kernel
//   corpus [dir]      lift + verify every kernel in a directory
//   dump-ir <file>    print the region IR
//   dump-graph <file> print the invariant graph (or DOT with --dot)
//
// Option precedence: command-line flags > STLIFT_* environment > defaults.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlift/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stlift;

namespace {

struct CommonOpts {
    int max_sweeps = 32;
    bool no_equiv_check = false;
    bool no_vertex_elim = false;
    bool trace = false;
};

void apply_env_defaults(CommonOpts& c) {
    if (const char* v = std::getenv("STLIFT_MAX_SWEEPS")) c.max_sweeps = std::atoi(v);
    if (const char* v = std::getenv("STLIFT_NO_EQUIV_CHECK")) c.no_equiv_check = std::atoi(v) != 0;
    if (const char* v = std::getenv("STLIFT_NO_VERTEX_ELIM")) c.no_vertex_elim = std::atoi(v) != 0;
}

LiftOptions lift_options(const CommonOpts& c) {
    LiftOptions o;
    o.max_sweeps = c.max_sweeps;
    o.equiv_check = !c.no_equiv_check;
    o.vertex_elim = !c.no_vertex_elim;
    o.trace = c.trace;
    o.trace_out = &std::cerr;
    return o;
}

// "trials=50,shape=8x8,seed=1,tol=1e-12"
VerifyConfig parse_verify_spec(const std::string& spec) {
    VerifyConfig cfg;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        std::string key = eq == std::string::npos ? item : item.substr(0, eq);
        std::string val = eq == std::string::npos ? "" : item.substr(eq + 1);
        if (key == "trials") cfg.trials = std::stoi(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "tol") cfg.tolerance = std::stod(val);
        else if (key == "shape") {
            cfg.shape.clear();
            std::stringstream dims(val);
            std::string d;
            while (std::getline(dims, d, 'x')) cfg.shape.push_back(std::stoll(d));
        } else {
            throw Error(ErrorCode::ShapeMismatch, "unknown verify option '" + key + "'");
        }
    }
    return cfg;
}

int run_lift(const std::string& file, const CommonOpts& common, const std::string& emit,
             const std::string& verify_spec, const std::string& out_dir, bool json_out) {
    PipelineOptions opt;
    opt.lift = lift_options(common);
    opt.want_summary = emit == "summary" || emit == "both";
    opt.want_dsl = emit == "dsl" || emit == "both";
    if (!verify_spec.empty()) opt.verify = parse_verify_spec(verify_spec);

    std::string name = kernel_name_of(file);
    int exit_code = 0;
    try {
        PipelineResult res = run_pipeline(read_file(file), name, opt);
        if (res.verify && !res.verify->pass()) exit_code = 2;
        if (!res.self_consistent) exit_code = 1;

        if (opt.want_summary) {
            fs::path p = fs::path(out_dir) / (name + ".summary.txt");
            std::ofstream(p) << res.summary_text;
            std::cerr << "wrote " << p.string() << "\n";
        }
        if (opt.want_dsl) {
            fs::path p = fs::path(out_dir) / (name + ".halide.txt");
            std::ofstream(p) << res.dsl_text;
            std::cerr << "wrote " << p.string() << "\n";
        }
        if (json_out) {
            std::cout << run_record(res, opt, file, exit_code).dump(2) << "\n";
        } else if (res.verify) {
            std::cout << res.verify->str() << "\n";
        } else {
            std::cout << emit_summary(*res.ir, res.lift.post);
        }
        return exit_code;
    } catch (const Error& e) {
        std::cerr << format_diagnostic(file, e) << "\n";
        return 1;
    }
}

int run_corpus(const std::string& dir, const CommonOpts& common, const std::string& verify_spec,
               bool json_out) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) {
        std::cerr << dir << ": error: corpus directory does not exist\n";
        return 1;
    }
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".st")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cout << "kernel           dims-points-out  opt  sweeps  lift-ms  verify\n";
        std::cerr << "warning: no .st kernels in " << dir << "\n";
        return 0;
    }

    VerifyConfig base_cfg = verify_spec.empty() ? VerifyConfig{} : parse_verify_spec(verify_spec);
    nlohmann::json records = nlohmann::json::array();
    bool any_fail = false;

    printf("%-18s %-16s %-6s %6s %8s  %s\n", "kernel", "dims-points-out", "opt", "sweeps",
           "lift-ms", "verify");
    for (const auto& f : files) {
        std::string name = kernel_name_of(f.string());
        PipelineOptions opt;
        opt.lift = lift_options(common);
        opt.verify = base_cfg;
        std::string meta_dims = "-", meta_opt = "--";
        try {
            std::string src = read_file(f.string());
            // kernel metadata line: "! meta: dims-points-out opt shape"
            {
                std::istringstream ss(src);
                std::string line;
                while (std::getline(ss, line)) {
                    if (line.rfind("! meta:", 0) == 0) {
                        std::istringstream ms(line.substr(7));
                        std::string shape;
                        ms >> meta_dims >> meta_opt >> shape;
                        if (!shape.empty()) {
                            VerifyConfig cfg = base_cfg;
                            cfg.shape.clear();
                            std::stringstream dims(shape);
                            std::string d;
                            while (std::getline(dims, d, 'x')) cfg.shape.push_back(std::stoll(d));
                            opt.verify = cfg;
                        }
                    }
                }
            }
            PipelineResult res = run_pipeline(src, name, opt);
            bool pass = res.verify && res.verify->pass() && res.self_consistent;
            any_fail = any_fail || !pass;
            printf("%-18s %-16s %-6s %6d %8.2f  %s\n", name.c_str(), meta_dims.c_str(),
                   meta_opt.c_str(), res.lift.total_sweeps, res.times.lift_ms,
                   pass ? "PASS" : "FAIL");
            // informational acceleration ratio for unrolled/tiled kernels
            if (meta_opt.find("LU") != std::string::npos ||
                meta_opt.find("LT") != std::string::npos) {
                PipelineOptions plain = opt;
                plain.verify.reset();
                plain.lift.equiv_check = false;
                plain.lift.vertex_elim = false;
                PipelineResult slow = run_pipeline(src, name, plain);
                if (res.times.lift_ms > 0.0)
                    printf("%-18s   acceleration: %.2fx lift-time (%d vs %d sweeps)\n", "",
                           slow.times.lift_ms / std::max(res.times.lift_ms, 0.01),
                           slow.lift.total_sweeps, res.lift.total_sweeps);
            }
            if (json_out) records.push_back(run_record(res, opt, f.string(), pass ? 0 : 2));
        } catch (const Error& e) {
            any_fail = true;
            printf("%-18s %-16s %-6s %6s %8s  FAIL (%s)\n", name.c_str(), meta_dims.c_str(),
                   meta_opt.c_str(), "-", "-", error_code_name(e.code));
            std::cerr << format_diagnostic(f.string(), e) << "\n";
        }
    }
    if (json_out) std::cout << records.dump(2) << "\n";
    return any_fail ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stlift: stencil kernel lifting to predicate summaries and Halide-style text"};
    app.require_subcommand(1);

    CommonOpts common;
    apply_env_defaults(common);

    std::string file, emit = "summary", verify_spec, out_dir = ".", dir = "kernels";
    bool json_out = false, dot = false;

    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--max-sweeps", common.max_sweeps, "per-SCC sweep cap");
        cmd->add_flag("--no-equiv-check", common.no_equiv_check, "disable branch-merge acceleration");
        cmd->add_flag("--no-vertex-elim", common.no_vertex_elim, "disable tiled-loop acceleration");
        cmd->add_flag("--trace", common.trace, "per-SCC sweep log on stderr");
    };

    CLI::App* lift = app.add_subcommand("lift", "lift one kernel");
    lift->add_option("file", file, "kernel file (.st)")->required();
    lift->add_option("--emit", emit, "summary | dsl | both | none")->capture_default_str();
    lift->add_option("--verify", verify_spec, "trials=N,shape=8x8,seed=S,tol=1e-12");
    lift->add_option("--out-dir", out_dir, "artifact directory")->capture_default_str();
    lift->add_flag("--json", json_out, "machine-readable run record on stdout");
    add_common(lift);

    CLI::App* corpus = app.add_subcommand("corpus", "lift and verify a kernel directory");
    corpus->add_option("dir", dir, "corpus directory")->capture_default_str();
    corpus->add_option("--verify", verify_spec, "verification overrides");
    corpus->add_flag("--json", json_out, "run records on stdout");
    add_common(corpus);

    CLI::App* dump_ir_cmd = app.add_subcommand("dump-ir", "print the region IR");
    dump_ir_cmd->add_option("file", file, "kernel file (.st)")->required();

    CLI::App* dump_graph_cmd = app.add_subcommand("dump-graph", "print the invariant graph");
    dump_graph_cmd->add_option("file", file, "kernel file (.st)")->required();
    dump_graph_cmd->add_flag("--dot", dot, "emit DOT");

    CLI11_PARSE(app, argc, argv);

    try {
        if (lift->parsed()) return run_lift(file, common, emit, verify_spec, out_dir, json_out);
        if (corpus->parsed()) return run_corpus(dir, common, verify_spec, json_out);
        if (dump_ir_cmd->parsed()) {
            auto k = parse_kernel(read_file(file), kernel_name_of(file));
            std::cout << dump_ir(lower_to_ir(k));
            return 0;
        }
        if (dump_graph_cmd->parsed()) {
            auto k = parse_kernel(read_file(file), kernel_name_of(file));
            IrModule m = lower_to_ir(k);
            InvariantGraph g = build_invariant_graph(m);
            std::cout << (dot ? dump_graph_dot(g) : dump_graph(g));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << format_diagnostic(file, e) << "\n";
        return 1;
    }
    return 0;
}
