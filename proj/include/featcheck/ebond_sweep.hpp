#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "featcheck/analysis.hpp"
#include "featcheck/ebond.hpp"
#include "featcheck/vardsl/unfold.hpp"

namespace featcheck::ebond {

enum class SweepMode { Family, OneByOne, Both };

struct SweepRow {
    std::int64_t bandwidth_mbit = 0;
    std::string config;
    std::string query;
    double value = 0;
    std::int64_t states = 0, moves = 0, build_ms = 0, solve_ms = 0;

    friend bool operator<(const SweepRow& a, const SweepRow& b) {
        if (a.bandwidth_mbit != b.bandwidth_mbit) return a.bandwidth_mbit < b.bandwidth_mbit;
        if (a.config != b.config) return a.config < b.config;
        return a.query < b.query;
    }
};

/// Family-versus-one-by-one comparison per bandwidth.
struct SweepStats {
    std::int64_t bandwidth_mbit = 0;
    std::int64_t family_states = 0, family_moves = 0, family_build_ms = 0, family_solve_ms = 0;
    std::int64_t onebyone_states = 0, onebyone_moves = 0, onebyone_build_ms = 0, onebyone_solve_ms = 0;
};

struct SweepOptions {
    SweepMode mode = SweepMode::Family;
    int workers = 1;
    bool wall_timings = false;
    EngineOptions engine;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepStats> stats;
    std::vector<std::pair<std::int64_t, std::string>> model_texts;  // per bandwidth
    bool converged = true;
};

namespace detail {

struct SweepJob {
    std::int64_t bandwidth;
    std::vector<EbondConfig> initial;  // singleton for one-by-one jobs
    bool family;
};

struct JobOutcome {
    std::vector<SweepRow> rows;
    std::int64_t states = 0, moves = 0, build_ms = 0, solve_ms = 0;
    bool converged = true;
};

inline JobOutcome run_sweep_job(const EbondParams& base, const SweepJob& job, const SweepOptions& opts) {
    using clock = std::chrono::steady_clock;
    EbondParams params = base;
    params.max_bandwidth_mbit = job.bandwidth;

    JobOutcome out;
    auto t0 = clock::now();
    vardsl::ModelFile model = build_ebond(params, job.initial);
    vardsl::VarJoinResult joined = vardsl::build_mdp(model);
    auto t1 = clock::now();
    out.states = joined.mdp.num_states();
    out.moves = joined.mdp.num_moves();
    if (opts.wall_timings)
        out.build_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();

    auto solve_start = clock::now();
    for (const auto& q : model.queries) {
        Query query;
        query.kind = q.kind;
        query.cost_type = q.cost_type;
        query.target = joined.eval_mask(q.target);
        if (q.constraint) query.constraint = joined.eval_mask(q.constraint);
        AnalysisResult res = run_query(joined.mdp, query, opts.engine);
        out.converged = out.converged && res.converged;
        for (std::int32_t s : joined.mdp.initial_states()) {
            SweepRow row;
            row.bandwidth_mbit = job.bandwidth;
            row.config = combination_config_text(joined.state_comb(s), model.signature);
            row.query = q.name;
            row.value = res.values[s];
            row.states = out.states;
            row.moves = out.moves;
            row.build_ms = out.build_ms;
            out.rows.push_back(std::move(row));
        }
    }
    auto solve_end = clock::now();
    if (opts.wall_timings)
        out.solve_ms = std::chrono::duration_cast<std::chrono::milliseconds>(solve_end - solve_start).count();
    for (auto& row : out.rows) row.solve_ms = out.solve_ms;
    return out;
}

} // namespace detail

/// Runs the bandwidth sweep: family jobs analyze one model holding every
/// requested initial configuration (per-initial-state values), one-by-one
/// jobs build a separate model per configuration. Jobs execute on a
/// bounded worker pool; the output order is deterministic regardless of
/// the worker count.
inline SweepResult sweep(const EbondParams& base, const std::vector<std::int64_t>& bandwidths,
                         const std::vector<EbondConfig>& configs, const SweepOptions& opts) {
    if (bandwidths.empty()) throw ContractViolation("sweep: empty bandwidth list");
    if (configs.empty()) throw ContractViolation("sweep: empty configuration list");

    std::vector<detail::SweepJob> jobs;
    for (std::int64_t b : bandwidths) {
        if (opts.mode != SweepMode::OneByOne) jobs.push_back({b, configs, true});
        if (opts.mode != SweepMode::Family)
            for (const EbondConfig& c : configs) jobs.push_back({b, {c}, false});
    }

    std::vector<detail::JobOutcome> outcomes(jobs.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs.size());
    int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(jobs.size())));
    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            try {
                outcomes[i] = detail::run_sweep_job(base, jobs[i], opts);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    // Errors surface with their row context, lowest job first.
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            std::string what = e.what();
            std::string ctx = "bandwidth " + std::to_string(jobs[i].bandwidth) +
                              (jobs[i].family ? std::string(" (family)")
                                              : " config " + jobs[i].initial.front().to_string());
            throw ModelError("sweep job for " + ctx + " failed: " + what);
        }
    }

    SweepResult result;
    std::map<std::int64_t, SweepStats> stats;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& job = jobs[i];
        const auto& out = outcomes[i];
        result.converged = result.converged && out.converged;
        // In Both mode the family rows are the reported values; one-by-one
        // jobs then only feed the statistics table.
        bool report_rows = opts.mode != SweepMode::Both || job.family;
        if (report_rows)
            result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
        SweepStats& st = stats[job.bandwidth];
        st.bandwidth_mbit = job.bandwidth;
        if (job.family) {
            st.family_states = out.states;
            st.family_moves = out.moves;
            st.family_build_ms = out.build_ms;
            st.family_solve_ms = out.solve_ms;
        } else {
            st.onebyone_states += out.states;
            st.onebyone_moves += out.moves;
            st.onebyone_build_ms += out.build_ms;
            st.onebyone_solve_ms += out.solve_ms;
        }
    }
    std::sort(result.rows.begin(), result.rows.end());
    for (auto& [b, st] : stats) result.stats.push_back(st);

    for (std::int64_t b : bandwidths) {
        EbondParams params = base;
        params.max_bandwidth_mbit = b;
        result.model_texts.emplace_back(b, ebond_model_text(params, configs));
    }
    return result;
}

inline std::string format_value(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "bandwidth_mbit,config,query,value,states,moves,build_ms,solve_ms\n";
    for (const auto& r : rows)
        os << r.bandwidth_mbit << "," << r.config << "," << r.query << "," << format_value(r.value)
           << "," << r.states << "," << r.moves << "," << r.build_ms << "," << r.solve_ms << "\n";
}

inline void write_stats_csv(std::ostream& os, const std::vector<SweepStats>& stats) {
    os << "bandwidth_mbit,family_states,family_moves,family_build_ms,family_solve_ms,"
       << "onebyone_states,onebyone_moves,onebyone_build_ms,onebyone_solve_ms\n";
    for (const auto& s : stats)
        os << s.bandwidth_mbit << "," << s.family_states << "," << s.family_moves << ","
           << s.family_build_ms << "," << s.family_solve_ms << "," << s.onebyone_states << ","
           << s.onebyone_moves << "," << s.onebyone_build_ms << "," << s.onebyone_solve_ms << "\n";
}

} // namespace featcheck::ebond
