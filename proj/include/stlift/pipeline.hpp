// End-to-end driver: parse -> strip -> regularity -> lower -> invariant
// graph -> lift -> (verify) -> (emit). Shared by the CLI and the test
// suites; produces a machine-readable run record.
#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stlift/checker.hpp"
#include "stlift/codegen.hpp"
#include "stlift/lift.hpp"
#include "stlift/verify.hpp"

namespace stlift {

struct PipelineOptions {
    LiftOptions lift;
    std::optional<VerifyConfig> verify;
    bool want_summary = false;
    bool want_dsl = false;
    bool check_consistency = true;
};

struct PhaseTimes {
    double parse_ms = 0;
    double lower_ms = 0;
    double lift_ms = 0;
    double verify_ms = 0;
    double emit_ms = 0;
};

struct PipelineResult {
    ast::KernelAst kernel;
    RegularityReport regularity;
    std::shared_ptr<IrModule> ir;
    std::shared_ptr<InvariantGraph> graph;
    LiftOutcome lift;
    bool self_consistent = true;
    std::string summary_text;
    std::string dsl_text;
    std::optional<VerificationReport> verify;
    PhaseTimes times;
};

namespace pipeline_detail {
inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace pipeline_detail

inline PipelineResult run_pipeline(const std::string& source, const std::string& kernel_name,
                                   const PipelineOptions& opt) {
    using clock = std::chrono::steady_clock;
    PipelineResult res;

    auto t0 = clock::now();
    res.kernel = parse_kernel(source, kernel_name);
    res.regularity = analyze_regularity(res.kernel);
    res.times.parse_ms = pipeline_detail::ms_since(t0);

    t0 = clock::now();
    res.ir = std::make_shared<IrModule>(lower_to_ir(res.kernel));
    res.graph = std::make_shared<InvariantGraph>(build_invariant_graph(*res.ir));
    res.times.lower_ms = pipeline_detail::ms_since(t0);

    t0 = clock::now();
    Lifter lifter(*res.graph, opt.lift);
    res.lift = lifter.run();
    if (opt.check_consistency) res.self_consistent = lifter.recheck_self_consistency();
    res.times.lift_ms = pipeline_detail::ms_since(t0);

    if (opt.verify) {
        t0 = clock::now();
        res.verify = verify_against_oracle(res.kernel, *res.ir, res.lift.post, *opt.verify);
        res.times.verify_ms = pipeline_detail::ms_since(t0);
    }

    t0 = clock::now();
    if (opt.want_summary) res.summary_text = emit_summary(*res.ir, res.lift.post);
    if (opt.want_dsl) res.dsl_text = emit_dsl(*res.ir, res.lift.post);
    res.times.emit_ms = pipeline_detail::ms_since(t0);
    return res;
}

inline nlohmann::json run_record(const PipelineResult& res, const PipelineOptions& opt,
                                 const std::string& file, int exit_code) {
    nlohmann::json sccs = nlohmann::json::array();
    for (const auto& s : res.lift.stats) {
        sccs.push_back({{"level", s.level},
                        {"scc", s.scc_index + 1},
                        {"startVertex", s.start_vertex},
                        {"sweeps", s.sweeps},
                        {"generalizationRounds", s.gen_rounds},
                        {"branchCounts", s.branch_counts},
                        {"eliminated", s.eliminated}});
    }
    nlohmann::json j{
        {"schema", "stlift-run/1"},
        {"kernel", res.kernel.name},
        {"file", file},
        {"levels", res.ir->levels()},
        {"outputs", [&] {
             nlohmann::json a = nlohmann::json::array();
             for (const auto& f : res.ir->outputs) a.push_back(f.array);
             return a;
         }()},
        {"totalSweeps", res.lift.total_sweeps},
        {"sccs", sccs},
        {"selfConsistent", res.self_consistent},
        {"options",
         {{"maxSweeps", opt.lift.max_sweeps},
          {"equivCheck", opt.lift.equiv_check},
          {"vertexElim", opt.lift.vertex_elim}}},
        {"phasesMs",
         {{"parse", res.times.parse_ms},
          {"lower", res.times.lower_ms},
          {"lift", res.times.lift_ms},
          {"verify", res.times.verify_ms},
          {"emit", res.times.emit_ms}}},
        {"exit", exit_code},
    };
    if (res.verify) {
        j["verify"] = {{"trials", res.verify->trials},
                       {"shape", res.verify->shape},
                       {"tolerance", res.verify->tolerance},
                       {"maxAbsError", res.verify->max_abs_error},
                       {"mismatchCount", res.verify->mismatch_count},
                       {"pass", res.verify->pass()}};
    } else {
        j["verify"] = nullptr;
    }
    return j;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingInput, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string kernel_name_of(const std::string& path) {
    size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace stlift
