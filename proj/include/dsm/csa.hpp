#pragma once

// Clonal selection optimizer for the appliance schedule.
//
// Each antibody holds one on-slot list per appliance. Uninterruptible rows are
// always a single run parameterised by its start slot; interruptible rows are
// any D_a-subset of the window; baseline rows never change. An appliance whose
// original slots lie outside its window may also sit at those slots. The operators
// preserve these shapes, so duration, window and contiguity hold by
// construction and only maximum demand and voltage need penalties.

#include "dsm/constraints.hpp"
#include "dsm/costing.hpp"
#include "dsm/problem.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dsm {

struct CsaConfig {
    int population_size = 60;
    int generations = 400;
    double clone_factor = 1.0;          // β
    int max_clones = 100;               // per antibody and generation
    double hypermutation_scale = 0.6;   // α
    double replacement_fraction = 0.15; // d
    /// Affinity penalty per kW·slot of demand excess and per pu of voltage
    /// excess. Negative selects 10 × C_e(original schedule).
    double constraint_penalty_weight = -1.0;
    std::uint64_t rng_seed = 1;
    int stall_generations = 60;
    int threads = 1;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

struct Antibody {
    OnSlots on_slots;

    friend bool operator==(const Antibody&, const Antibody&) = default;
};

/// Gene domains of one Problem.
class Encoding {
public:
    explicit Encoding(const Problem& problem);

    const Problem& problem() const { return problem_; }

    /// Uniformly random antibody.
    Antibody random(std::mt19937_64& rng) const;
    /// Antibody for the given on-slots if they respect the gene domains.
    std::optional<Antibody> encode(const OnSlots& on_slots) const;
    Schedule decode(const Antibody& ab) const;

    /// Mutates each flexible gene with probability `rate`; when rate > 0 at
    /// least one movable gene changes.
    void mutate(Antibody& ab, double rate, std::mt19937_64& rng) const;

    /// Earliest and latest start of an uninterruptible appliance inside its
    /// declared window.
    std::pair<Slot, Slot> start_range(std::size_t appliance) const;

private:
    void mutate_gene(std::vector<Slot>& row, std::size_t appliance, double rate, std::mt19937_64& rng) const;
    std::vector<Slot> random_row(std::size_t appliance, std::mt19937_64& rng) const;
    bool movable(std::size_t appliance) const;
    bool slides(std::size_t appliance) const;

    const Problem& problem_;
    std::vector<std::size_t> flexible_;
    std::vector<SlotWindow> windows_;
    std::vector<bool> keeps_original_;
    std::vector<double> placements_; // in the declared window
};

/// Seed for the random stream of one (run, generation, individual) triple.
std::uint64_t child_seed(std::uint64_t run_seed, std::uint64_t generation, std::uint64_t index);

struct Individual {
    Antibody antibody;
    Score score;
    double affinity = 0.0;
};

/// −(C_e + C_p) − weight·(demand excess + voltage excess), with a large
/// finite penalty per slot whose power flow failed. Higher is better.
double affinity(const Score& score, double penalty_weight);

/// Ranking used for selection: higher affinity, then smaller Σ ΔT_a, then
/// lexicographically earliest on-slots.
bool ranks_before(const Individual& a, const Individual& b);

/// Number of clones for the antibody at 1-based `rank`.
int clone_count(const CsaConfig& config, int rank);
/// Per-gene mutation probability for the antibody at 1-based `rank`.
double mutation_rate(const CsaConfig& config, int rank);

/// One round of cloning and hypermutation of a ranked population. Clone k
/// draws from child_seed(run_seed, generation, k).
std::vector<Antibody> clone_and_hypermutate(const std::vector<Individual>& ranked, const Encoding& encoding,
                                            const CsaConfig& config, std::uint64_t generation);

struct GenerationRecord {
    int generation = 0;
    double best_total_usd = 0.0; // best feasible so far, else best overall
    double best_affinity = 0.0;
    std::uint64_t evaluations = 0;
};

struct OptimResult {
    bool success = false;
    std::string failure;
    Schedule schedule;
    CostBreakdown cost;
    FeasibilityReport feasibility;
    std::vector<GenerationRecord> history;
    std::uint64_t evaluations = 0;
    std::uint64_t seed = 0;
    double penalty_weight = 0.0;
};

OptimResult optimize(const Evaluator& evaluator, const CsaConfig& config);
OptimResult optimize(const Problem& problem, const CsaConfig& config);

std::string convergence_csv(const std::vector<GenerationRecord>& history);

} // namespace dsm
