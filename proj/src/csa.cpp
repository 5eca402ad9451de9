#include "dsm/csa.hpp"

#include "dsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace dsm {

namespace {

constexpr double kFlowFailurePenalty = 1e3;

// Chance that a mutation sends an appliance back to original slots that lie
// outside its window.
constexpr double kReturnToOriginal = 0.1;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

template <typename F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(threads, 1));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
}

std::vector<Slot> run_from(Slot start, int duration) {
    std::vector<Slot> row(static_cast<std::size_t>(duration));
    for (int k = 0; k < duration; ++k) row[static_cast<std::size_t>(k)] = start + k;
    return row;
}

} // namespace

void CsaConfig::validate() const {
    if (population_size < 2) throw ConfigError("population_size must be at least 2");
    if (generations < 0) throw ConfigError("generations must be non-negative");
    if (clone_factor < 0.0 || hypermutation_scale < 0.0) throw ConfigError("CSA weights must be non-negative");
    if (max_clones < 1) throw ConfigError("max_clones must be at least 1");
    if (replacement_fraction < 0.0 || replacement_fraction >= 1.0)
        throw ConfigError("replacement_fraction must lie in [0, 1)");
    if (stall_generations < 1) throw ConfigError("stall_generations must be at least 1");
    if (threads < 0) throw ConfigError("threads must be non-negative");
}

std::uint64_t child_seed(std::uint64_t run_seed, std::uint64_t generation, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(run_seed) ^ generation) ^ index);
}

Encoding::Encoding(const Problem& problem) : problem_(problem) {
    for (const auto& app : problem.appliances) {
        if (app.flexible()) flexible_.push_back(windows_.size());
        windows_.push_back(app.window);
        keeps_original_.push_back(problem.keeps_original(app));
        const int n = app.window.length();
        double count = 1.0;
        if (app.cls == ApplianceClass::Uninterruptible)
            count = n - app.duration + 1;
        else
            for (int k = 0; k < app.duration; ++k) count = count * (n - k) / (k + 1);
        placements_.push_back(count);
    }
}

std::pair<Slot, Slot> Encoding::start_range(std::size_t appliance) const {
    const auto& w = windows_[appliance];
    return {w.start, w.end - problem_.appliances[appliance].duration + 1};
}

bool Encoding::slides(std::size_t appliance) const {
    return problem_.appliances[appliance].duration < windows_[appliance].length();
}

bool Encoding::movable(std::size_t appliance) const { return slides(appliance) || keeps_original_[appliance]; }

std::vector<Slot> Encoding::random_row(std::size_t a, std::mt19937_64& rng) const {
    const auto& app = problem_.appliances[a];
    if (app.cls == ApplianceClass::Uninterruptible) {
        const auto [lo, hi] = start_range(a);
        return run_from(uniform_int(rng, lo, hi), app.duration);
    }
    const auto& w = windows_[a];
    std::vector<Slot> pool;
    for (Slot t = w.start; t <= w.end; ++t) pool.push_back(t);
    for (int k = 0; k < app.duration; ++k)
        std::swap(pool[static_cast<std::size_t>(k)],
                  pool[static_cast<std::size_t>(uniform_int(rng, k, static_cast<int>(pool.size()) - 1))]);
    pool.resize(static_cast<std::size_t>(app.duration));
    std::sort(pool.begin(), pool.end());
    return pool;
}

Antibody Encoding::random(std::mt19937_64& rng) const {
    Antibody ab{problem_.original_on_slots()};
    for (std::size_t a : flexible_) {
        // The original placement, when allowed, is one more point of the domain.
        if (keeps_original_[a] && uniform01(rng) * (placements_[a] + 1.0) < 1.0) continue;
        ab.on_slots[a] = random_row(a, rng);
    }
    return ab;
}

std::optional<Antibody> Encoding::encode(const OnSlots& on_slots) const {
    const auto& apps = problem_.appliances;
    if (on_slots.size() != apps.size()) return std::nullopt;
    for (std::size_t a = 0; a < apps.size(); ++a) {
        const auto& row = on_slots[a];
        if (static_cast<int>(row.size()) != apps[a].duration) return std::nullopt;
        if (!std::is_sorted(row.begin(), row.end()) || std::adjacent_find(row.begin(), row.end()) != row.end())
            return std::nullopt;
        if (apps[a].cls == ApplianceClass::Baseline) {
            if (row != apps[a].original_on_slots) return std::nullopt;
            continue;
        }
        if (keeps_original_[a] && row == apps[a].original_on_slots) continue;
        if (!row.empty() && (!windows_[a].contains(row.front()) || !windows_[a].contains(row.back())))
            return std::nullopt;
        if (apps[a].cls == ApplianceClass::Uninterruptible && !row.empty() &&
            row.back() - row.front() + 1 != static_cast<int>(row.size()))
            return std::nullopt;
    }
    return Antibody{on_slots};
}

Schedule Encoding::decode(const Antibody& ab) const {
    return schedule_from_on_slots(ab.on_slots, problem_.grid.slot_count, problem_.appliances);
}

void Encoding::mutate_gene(std::vector<Slot>& row, std::size_t a, double rate, std::mt19937_64& rng) const {
    const auto& app = problem_.appliances[a];
    const auto& w = windows_[a];
    if (keeps_original_[a]) {
        if (row == app.original_on_slots) {
            row = random_row(a, rng);
            return;
        }
        if (!slides(a) || uniform01(rng) < kReturnToOriginal) {
            row = app.original_on_slots;
            return;
        }
    }
    if (app.cls == ApplianceClass::Uninterruptible) {
        const auto [lo, hi] = start_range(a);
        const int width = hi - lo;
        const int reach = std::max(1, static_cast<int>(std::ceil(rate * width)));
        const int step = uniform_int(rng, 1, reach);
        const Slot start = row.front();
        Slot next = uniform01(rng) < 0.5 ? start - step : start + step;
        if (next < lo || next > hi) next = 2 * start - next; // reflect into the window
        next = std::clamp(next, lo, hi);
        row = run_from(next, app.duration);
        return;
    }

    auto is_on = [&](Slot t) { return std::binary_search(row.begin(), row.end(), t); };
    if (uniform01(rng) < 0.5) {
        // Creep: move one on-slot to a free slot nearby.
        const int reach = std::max(1, static_cast<int>(std::ceil(rate * w.length() / 2.0)));
        const auto k = static_cast<std::size_t>(uniform_int(rng, 0, app.duration - 1));
        std::vector<Slot> free;
        for (Slot t = std::max(w.start, row[k] - reach); t <= std::min(w.end, row[k] + reach); ++t)
            if (!is_on(t)) free.push_back(t);
        if (!free.empty()) {
            row[k] = free[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(free.size()) - 1))];
            std::sort(row.begin(), row.end());
            return;
        }
    }
    // Resample a random subset of the slots anywhere in the window.
    const int count = std::clamp(static_cast<int>(std::lround(rate * app.duration)), 1,
                                 std::min(app.duration, w.length() - app.duration));
    std::vector<Slot> free;
    for (Slot t = w.start; t <= w.end; ++t)
        if (!is_on(t)) free.push_back(t);
    for (int c = 0; c < count; ++c) {
        const auto k = static_cast<std::size_t>(uniform_int(rng, c, app.duration - 1));
        std::swap(row[static_cast<std::size_t>(c)], row[k]);
        const auto f = static_cast<std::size_t>(uniform_int(rng, c, static_cast<int>(free.size()) - 1));
        std::swap(free[static_cast<std::size_t>(c)], free[f]);
        row[static_cast<std::size_t>(c)] = free[static_cast<std::size_t>(c)];
    }
    std::sort(row.begin(), row.end());
}

void Encoding::mutate(Antibody& ab, double rate, std::mt19937_64& rng) const {
    if (rate <= 0.0) return;
    bool changed = false;
    for (std::size_t a : flexible_) {
        if (!movable(a) || uniform01(rng) >= rate) continue;
        mutate_gene(ab.on_slots[a], a, rate, rng);
        changed = true;
    }
    if (changed) return;
    std::vector<std::size_t> candidates;
    for (std::size_t a : flexible_)
        if (movable(a)) candidates.push_back(a);
    if (candidates.empty()) return;
    const auto a = candidates[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(candidates.size()) - 1))];
    mutate_gene(ab.on_slots[a], a, rate, rng);
}

double affinity(const Score& score, double penalty_weight) {
    return -score.total_usd() -
           penalty_weight * (score.md_excess_kw_slots + score.voltage_excess_pu +
                             kFlowFailurePenalty * score.flow_failures);
}

bool ranks_before(const Individual& a, const Individual& b) {
    return better_outcome(-a.affinity, a.score.total_shift, a.antibody.on_slots, -b.affinity, b.score.total_shift,
                          b.antibody.on_slots);
}

int clone_count(const CsaConfig& config, int rank) {
    const double n = config.clone_factor * config.population_size / rank;
    return std::clamp(static_cast<int>(std::lround(n)), 1, config.max_clones);
}

double mutation_rate(const CsaConfig& config, int rank) {
    return std::min(1.0, config.hypermutation_scale * rank / config.population_size);
}

std::vector<Antibody> clone_and_hypermutate(const std::vector<Individual>& ranked, const Encoding& encoding,
                                            const CsaConfig& config, std::uint64_t generation) {
    std::vector<std::pair<std::size_t, double>> plan; // parent index, rate
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const int rank = static_cast<int>(i) + 1;
        const double rate = mutation_rate(config, rank);
        for (int c = 0; c < clone_count(config, rank); ++c) plan.emplace_back(i, rate);
    }
    std::vector<Antibody> clones(plan.size());
    parallel_for(plan.size(), config.threads, [&](std::size_t k) {
        std::mt19937_64 rng(child_seed(config.rng_seed, generation, k));
        clones[k] = ranked[plan[k].first].antibody;
        encoding.mutate(clones[k], plan[k].second, rng);
    });
    return clones;
}

namespace {

class Search {
public:
    Search(const Evaluator& ev, const CsaConfig& cfg, double weight)
        : ev_(ev), cfg_(cfg), weight_(weight), encoding_(ev.problem()) {}

    const Encoding& encoding() const { return encoding_; }
    std::uint64_t evaluations() const { return evaluations_; }

    std::vector<Individual> evaluate(std::vector<Antibody> antibodies) {
        std::vector<Individual> out(antibodies.size());
        parallel_for(antibodies.size(), cfg_.threads, [&](std::size_t i) {
            out[i].antibody = std::move(antibodies[i]);
            out[i].score = ev_.score(out[i].antibody.on_slots);
            out[i].affinity = affinity(out[i].score, weight_);
        });
        evaluations_ += out.size();
        return out;
    }

    std::vector<Antibody> randoms(std::size_t count, std::uint64_t generation, std::uint64_t offset) const {
        std::vector<Antibody> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::mt19937_64 rng(child_seed(cfg_.rng_seed, generation, offset + i));
            out[i] = encoding_.random(rng);
        }
        return out;
    }

private:
    const Evaluator& ev_;
    const CsaConfig& cfg_;
    double weight_;
    Encoding encoding_;
    std::uint64_t evaluations_ = 0;
};

void sort_ranked(std::vector<Individual>& pop) { std::stable_sort(pop.begin(), pop.end(), ranks_before); }

// Offset separating fresh random antibodies from clones in the seed space.
constexpr std::uint64_t kRandomStream = 1ULL << 40;

} // namespace

OptimResult optimize(const Evaluator& evaluator, const CsaConfig& config) {
    config.validate();
    const auto& problem = evaluator.problem();
    const auto original = problem.original_on_slots();

    double weight = config.constraint_penalty_weight;
    if (weight < 0.0) weight = 10.0 * std::max(evaluator.score(original).c_e_usd, 1.0);

    Search search(evaluator, config, weight);
    const auto n = static_cast<std::size_t>(config.population_size);

    std::vector<Antibody> seeds;
    if (auto ab = search.encoding().encode(original)) seeds.push_back(std::move(*ab));
    auto fill = search.randoms(n - seeds.size(), 0, kRandomStream);
    seeds.insert(seeds.end(), std::make_move_iterator(fill.begin()), std::make_move_iterator(fill.end()));

    auto population = search.evaluate(std::move(seeds));
    sort_ranked(population);

    Individual best = population.front();
    std::optional<Individual> best_feasible;
    auto consider = [&](const std::vector<Individual>& pop) {
        bool improved = false;
        if (ranks_before(pop.front(), best)) {
            best = pop.front();
            improved = true;
        }
        for (const auto& ind : pop) {
            if (!ind.score.soft_feasible()) continue;
            if (!best_feasible || ranks_before(ind, *best_feasible)) {
                best_feasible = ind;
                improved = true;
            }
            break; // population is ranked; the first feasible one is the best
        }
        return improved;
    };
    auto record = [&](int g, std::uint64_t evaluations) {
        const Individual& shown = best_feasible ? *best_feasible : best;
        return GenerationRecord{g, shown.score.total_usd(), best.affinity, evaluations};
    };
    consider(population);

    OptimResult result;
    result.seed = config.rng_seed;
    result.penalty_weight = weight;
    result.history.push_back(record(0, search.evaluations()));

    const auto replace = static_cast<std::size_t>(std::lround(config.replacement_fraction * config.population_size));
    int stall = 0;
    for (int g = 1; g <= config.generations && stall < config.stall_generations; ++g) {
        const auto gen = static_cast<std::uint64_t>(g);
        auto clones = search.evaluate(clone_and_hypermutate(population, search.encoding(), config, gen));

        // Each parent is replaced by its best clone when that clone ranks higher.
        std::size_t k = 0;
        for (std::size_t i = 0; i < population.size(); ++i) {
            const int count = clone_count(config, static_cast<int>(i) + 1);
            std::size_t champion = k;
            for (int c = 1; c < count; ++c)
                if (ranks_before(clones[k + static_cast<std::size_t>(c)], clones[champion]))
                    champion = k + static_cast<std::size_t>(c);
            if (ranks_before(clones[champion], population[i])) population[i] = std::move(clones[champion]);
            k += static_cast<std::size_t>(count);
        }
        sort_ranked(population);

        if (replace > 0) {
            auto fresh = search.evaluate(search.randoms(replace, gen, kRandomStream));
            for (std::size_t r = 0; r < replace; ++r) population[n - 1 - r] = std::move(fresh[r]);
            sort_ranked(population);
        }

        stall = consider(population) ? 0 : stall + 1;
        result.history.push_back(record(g, search.evaluations()));
    }

    result.evaluations = search.evaluations();
    const Individual& chosen = best_feasible ? *best_feasible : best;
    result.schedule = search.encoding().decode(chosen.antibody);
    result.feasibility = is_feasible(result.schedule, evaluator);
    try {
        result.cost = evaluator.total_cost(chosen.antibody.on_slots);
    } catch (const ConvergenceError& e) {
        result.failure = e.what();
    }
    if (!best_feasible)
        result.failure = "no feasible schedule found; returning the least infeasible candidate";
    else if (!result.feasibility.feasible())
        result.failure = "best candidate failed the final feasibility check";
    result.success = result.failure.empty();
    return result;
}

OptimResult optimize(const Problem& problem, const CsaConfig& config) {
    Evaluator ev(problem);
    return optimize(ev, config);
}

std::string convergence_csv(const std::vector<GenerationRecord>& history) {
    std::string out = "generation,best_total_usd,evaluations\n";
    char buf[96];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%llu\n", h.generation, h.best_total_usd,
                      static_cast<unsigned long long>(h.evaluations));
        out += buf;
    }
    return out;
}

} // namespace dsm
