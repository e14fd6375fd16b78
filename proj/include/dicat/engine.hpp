#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicat/dicat_data.hpp"
#include "dicat/expr.hpp"

namespace dicat {

struct ProbeResult {
    std::size_t probe_index = 0;
    std::string probe;
    double residual = 0.0;
    bool pass = true;
    std::string error;  // evaluation failure, if any
};

struct AxiomResult {
    std::string id;
    std::string cite;
    std::size_t probes = 0;
    std::size_t failures = 0;
    double max_residual = 0.0;
    std::string worst_probe;
    std::vector<ProbeResult> failing;  // failing probes, for reports
    bool ok() const { return failures == 0; }
};

struct CheckReport {
    std::string instance;
    std::uint64_t seed = 0;
    double tol = 0.0;
    bool scramble = false;
    StructureReport structure;
    FibrationReport fibrations;
    std::vector<AxiomResult> axioms;
    bool structure_ran = false;
    bool axioms_ran = false;

    bool all_passed() const;
    double max_axiom_residual() const;
};

struct RunConfig {
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::size_t probe_cap = 400;       // per-axiom probe tuples
    std::size_t threads = 1;           // capped by DICAT_THREADS
    std::vector<std::string> axiom_filter;  // ids or globs; empty = all
    bool skip_fibrations = false;
};

std::size_t thread_count_from_env(std::size_t requested);

bool glob_match(const std::string& pattern, const std::string& text);

AxiomResult check_axiom(const DicatData& d, const AxiomDef& ax, const RunConfig& cfg);

// validate_structure + check_fibrations + every selected axiom, in order;
// (axiom, probe) results are computed in parallel work items and merged by
// sorted keys, so the report is deterministic for fixed inputs.
CheckReport run_suite(const DicatData& d, const std::vector<AxiomDef>& axioms,
                      const RunConfig& cfg);

struct MutationSpec {
    D2Key target = D2Key::HorizAssociator;
    std::uint64_t seed = 1;
    bool single_probe = false;  // perturb only one component instead of all
    bool identity = false;      // scale by 1: a deliberate no-op control
};

struct MutationOutcome {
    CheckReport report;
    bool detected = false;
    std::vector<std::string> failed_axioms;
    std::vector<std::string> failed_structure;
};

// Replaces the target component family by a seeded nontrivial rescaling and
// reruns the suite; a mutation that produces a non-isomorphism still counts,
// surfacing as a structural failure.
MutationOutcome mutate_and_check(const DicatData& d, const std::vector<AxiomDef>& axioms,
                                 const MutationSpec& spec, const RunConfig& cfg);

// An oracle wrapper implementing the mutation.
std::shared_ptr<InstanceOracle> make_mutated_oracle(std::shared_ptr<InstanceOracle> base,
                                                    const MutationSpec& spec);

}  // namespace dicat
