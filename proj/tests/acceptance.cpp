// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
//   A1 reference kernel reproduction        lifted postcondition equals the reference,
//                               DSL has the pure-def + select shape, < 1 s
//   A2 oracle suite             every bundled kernel verifies (50 trials)
//   A3 self-consistency         rule re-application reproduces all summaries
//   A4 termination              sweep caps hold; reference kernel inner scc: 2 rounds
//   A5 acceleration safety      toggled runs agree; accelerated sweeps <=
//   A6 scaling shape            log-log slope over the point-count family <= 2
//   A7 negative controls        irregular rejected; corrupted post localized

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "stlift/pipeline.hpp"
#include "support/summary_text.hpp"

using namespace stlift;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail = "") {
    printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : " - ",
           detail.c_str());
    if (!pass) ++failures;
}

std::string kernel_path(const std::string& name) {
    return std::string(STLIFT_KERNEL_DIR) + "/" + name;
}

std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(STLIFT_KERNEL_DIR))
        if (e.is_regular_file() && e.path().extension() == ".st") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int64_t> shape_of(const std::string& src) {
    std::istringstream in(src);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("! meta:", 0) != 0) continue;
        std::istringstream ms(line.substr(7));
        std::string dims, opt, shape;
        ms >> dims >> opt >> shape;
        std::vector<int64_t> out;
        std::stringstream ss(shape);
        std::string d;
        while (std::getline(ss, d, 'x')) out.push_back(std::stoll(d));
        if (!out.empty()) return out;
    }
    return {8, 8};
}

double lift_ms_of(const std::string& file, int repeats = 5) {
    std::string src = read_file(file);
    double best = 1e18;
    for (int k = 0; k < repeats; ++k) {
        PipelineOptions opt;
        opt.check_consistency = false;
        PipelineResult res = run_pipeline(src, "scale", opt);
        best = std::min(best, res.times.lift_ms);
    }
    return std::max(best, 0.05);  // floor against clock noise
}

void a1_reference_kernel() {
    auto t0 = std::chrono::steady_clock::now();
    PipelineOptions opt;
    opt.want_dsl = true;
    opt.want_summary = true;
    PipelineResult res = run_pipeline(read_file(kernel_path("diag_2d2p.st")), "diag_2d2p", opt);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    Summary reference = testsupport::parse_summary_text(
        "B(x1, x2):\n"
        "  2 <= x1 .and. x1 <= N .and. 2 <= x2 .and. x2 <= M -> A(x1, x2) + A(x1 - 1, x2 - 1)\n"
        "  otherwise -> B0(x1, x2)\n");
    EqualityVerdict v = prove_equal(res.lift.post, reference);
    bool post_ok = v.status == EqualityVerdict::Status::Equal;

    bool dsl_ok = res.dsl_text.find("B(x1, x2) = select(") != std::string::npos &&
                  res.dsl_text.find("A(x1, x2) + A(x1 - 1, x2 - 1)") != std::string::npos &&
                  res.dsl_text.find("B0(x1, x2))") != std::string::npos &&
                  res.dsl_text.find("Func B;") != std::string::npos;
    bool fast = ms < 1000.0;
    report("A1 reference kernel reproduction", post_ok && dsl_ok && fast,
           post_ok ? (dsl_ok ? (fast ? "postcondition and DSL match, " + std::to_string(ms) + " ms"
                                     : "too slow: " + std::to_string(ms) + " ms")
                             : "DSL shape mismatch")
                   : "postcondition differs: " + v.witness);
}

void a2_oracle_suite() {
    auto t0 = std::chrono::steady_clock::now();
    int kernels = 0;
    std::string failed;
    for (const std::string& file : corpus_files()) {
        std::string src = read_file(file);
        PipelineOptions opt;
        VerifyConfig cfg;
        cfg.trials = 50;
        cfg.shape = shape_of(src);
        cfg.seed = 1;
        cfg.tolerance = 1e-12;
        for (int64_t d : cfg.shape)
            if (d > 16) cfg.shape = {8, 8, 8};
        opt.verify = cfg;
        try {
            PipelineResult res = run_pipeline(src, kernel_name_of(file), opt);
            ++kernels;
            if (!res.verify->pass()) failed += kernel_name_of(file) + " ";
        } catch (const Error& e) {
            failed += kernel_name_of(file) + "(" + error_code_name(e.code) + ") ";
        }
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = failed.empty() && kernels >= 10 && sec < 60.0;
    report("A2 oracle suite", ok,
           std::to_string(kernels) + " kernels, 50 trials each, " + std::to_string(sec) + " s" +
               (failed.empty() ? "" : "; failed: " + failed));
}

void a3_self_consistency() {
    std::string failed;
    for (const std::string& file : corpus_files()) {
        IrModule ir = lower_to_ir(parse_kernel(read_file(file), kernel_name_of(file)));
        InvariantGraph g = build_invariant_graph(ir);
        Lifter lifter(g);
        lifter.run();
        std::string why;
        if (!lifter.recheck_self_consistency(&why)) failed += kernel_name_of(file) + " ";
    }
    report("A3 self-consistency", failed.empty(),
           failed.empty() ? "rule re-application reproduces every vertex summary"
                          : "failed: " + failed);
}

void a4_termination() {
    std::string detail;
    bool ok = true;
    int cap = 32;
    for (const std::string& file : corpus_files()) {
        IrModule ir = lower_to_ir(parse_kernel(read_file(file), kernel_name_of(file)));
        InvariantGraph g = build_invariant_graph(ir);
        LiftOptions opt;
        opt.max_sweeps = cap;
        Lifter lifter(g, opt);
        LiftOutcome out = lifter.run();
        for (const auto& s : out.stats)
            if (s.sweeps > cap) {
                ok = false;
                detail += kernel_name_of(file) + " exceeded cap; ";
            }
    }
    // golden sweep count: the reference kernel inner scc converges in exactly 2 rounds
    IrModule ir = lower_to_ir(parse_kernel(read_file(kernel_path("diag_2d2p.st")), "diag_2d2p"));
    InvariantGraph g = build_invariant_graph(ir);
    Lifter lifter(g);
    LiftOutcome out = lifter.run();
    bool golden = false;
    for (const auto& s : out.stats)
        if (s.level == 1 && s.gen_rounds == 2 && s.sweeps == 2) golden = true;
    if (!golden) {
        ok = false;
        detail += "reference kernel inner scc did not converge in 2 generalization rounds;";
    }
    // sweep counts non-decreasing in point count across the family
    std::vector<std::string> family = {"blur_1d3p.st", "heat_2d5p.st", "heat_3d7p.st"};
    int prev = 0;
    for (const auto& f : family) {
        IrModule m2 = lower_to_ir(parse_kernel(read_file(kernel_path(f)), f));
        InvariantGraph g2 = build_invariant_graph(m2);
        Lifter l2(g2);
        int sweeps = l2.run().total_sweeps;
        if (sweeps < prev) {
            ok = false;
            detail += f + " sweeps decreased;";
        }
        prev = sweeps;
    }
    report("A4 termination", ok, ok ? "all kernels within the sweep cap; reference kernel: 2 rounds" : detail);
}

void a5_acceleration_safety() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"unrolled3_1d3p.st", "tiled_2d5p.st"}) {
        std::string src = read_file(kernel_path(name));
        PipelineOptions fast;
        PipelineOptions slow;
        slow.lift.equiv_check = false;
        slow.lift.vertex_elim = false;
        PipelineResult rf = run_pipeline(src, name, fast);
        PipelineResult rs = run_pipeline(src, name, slow);
        EqualityVerdict v = prove_equal(rf.lift.post, rs.lift.post);
        if (v.status != EqualityVerdict::Status::Equal) {
            ok = false;
            detail += std::string(name) + " posts differ; ";
        }
        if (rf.lift.total_sweeps > rs.lift.total_sweeps) {
            ok = false;
            detail += std::string(name) + " accelerated run used more sweeps; ";
        }
        double ratio = rs.times.lift_ms / std::max(rf.times.lift_ms, 0.01);
        char buf[96];
        snprintf(buf, sizeof buf, "%s %.2fx (%d vs %d sweeps); ", name, ratio,
                 rs.lift.total_sweeps, rf.lift.total_sweeps);
        detail += buf;  // informational, no threshold at desk scale
    }
    report("A5 acceleration safety", ok, detail);
}

void a6_scaling_shape() {
    struct Point {
        const char* file;
        double points;
    };
    std::vector<Point> family = {{"blur_1d3p.st", 3},
                                 {"heat_2d5p.st", 5},
                                 {"heat_3d7p.st", 7},
                                 {"star_3d19p.st", 19},
                                 {"box_3d27p.st", 27}};
    // least-squares slope of log(time) on log(points)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    std::string detail = "lift ms:";
    for (const auto& p : family) {
        double ms = lift_ms_of(kernel_path(p.file));
        char buf[48];
        snprintf(buf, sizeof buf, " %s=%.2f", p.file, ms);
        detail += buf;
        double x = std::log(p.points), y = std::log(ms);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    char buf[48];
    snprintf(buf, sizeof buf, "; slope=%.2f", slope);
    detail += buf;
    report("A6 scaling shape", slope <= 2.0, detail);
}

void a7_negative_controls() {
    bool irregular_ok = false;
    try {
        PipelineOptions opt;
        run_pipeline(read_file(std::string(STLIFT_KERNEL_DIR) + "/negative/irregular.st"),
                     "irregular", opt);
    } catch (const Error& e) {
        irregular_ok = e.code == ErrorCode::IrregularLoop;
    }

    // corrupt the reference postcondition: x1 - 1 becomes x1 + 1 where in bounds
    PipelineOptions opt;
    PipelineResult res = run_pipeline(read_file(kernel_path("diag_2d2p.st")), "diag_2d2p", opt);
    Summary bad = res.lift.post;
    bool mismatch_ok = false;
    if (!bad.branches.empty()) {
        bad.branches[0].value =
            sym::add(sym::get("A", {pos_var(0), pos_var(1)}),
                     sym::get("A", {sym::add(pos_var(0), sym::constant(-1)), pos_var(1)}));
        VerificationReport rep =
            verify_against_oracle(res.kernel, *res.ir, bad, VerifyConfig{5, {8, 8}, 3, 1e-12});
        mismatch_ok = !rep.pass() && rep.first_mismatch.has_value() &&
                      rep.first_mismatch->array == "B" && rep.first_mismatch->position[0] >= 2;
    }
    report("A7 negative controls", irregular_ok && mismatch_ok,
           std::string(irregular_ok ? "irregular rejected" : "irregular NOT rejected") + "; " +
               (mismatch_ok ? "corrupted postcondition localized" : "corruption undetected"));
}

}  // namespace

int main() {
    a1_reference_kernel();
    a2_oracle_suite();
    a3_self_consistency();
    a4_termination();
    a5_acceleration_safety();
    a6_scaling_shape();
    a7_negative_controls();
    if (failures) printf("%d criterion(s) failed\n", failures);
    else printf("all acceptance criteria passed\n");
    return failures ? 1 : 0;
}
