#include "pce/moo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pce/csv.hpp"
#include "pce/rng.hpp"

namespace pce {

bool dominates(const Individual& a, const Individual& b) {
    if (a.objectives.size() != b.objectives.size())
        throw InvalidArgument("dominates: objective vectors differ in length");
    const bool fa = a.feasible();
    const bool fb = b.feasible();
    if (fa != fb) return fa;
    if (!fa) return a.total_violation < b.total_violation;
    bool strictly_better = false;
    for (std::size_t l = 0; l < a.objectives.size(); ++l) {
        if (a.objectives[l] > b.objectives[l]) return false;
        if (a.objectives[l] < b.objectives[l]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) return fronts;

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(pop[j], pop[i])) {
                dominated[j].push_back(i);
                ++domination_count[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (domination_count[i] == 0) {
            pop[i].rank = 0;
            current.push_back(i);
        }
    }
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            for (std::size_t j : dominated[i]) {
                if (--domination_count[j] == 0) {
                    pop[j].rank = static_cast<int>(fronts.size());
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Individual> front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    const std::size_t n_obj = front[0].objectives.size();
    std::vector<std::size_t> order(n);
    for (std::size_t l = 0; l < n_obj; ++l) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (front[a].objectives[l] != front[b].objectives[l])
                return front[a].objectives[l] < front[b].objectives[l];
            return a < b;
        });
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        const double range = front[order.back()].objectives[l] - front[order.front()].objectives[l];
        if (range <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (std::isinf(dist[order[i]])) continue;
            dist[order[i]] +=
                (front[order[i + 1]].objectives[l] - front[order[i - 1]].objectives[l]) / range;
        }
    }
    return dist;
}

namespace {

std::string format_genome(std::span<const double> genome) {
    std::string out = "(";
    for (std::size_t j = 0; j < genome.size(); ++j) {
        if (j) out += ", ";
        out += format_double(genome[j]);
    }
    out += ")";
    return out;
}

class Evolver {
public:
    Evolver(const MooProblem& problem, const MooConfig& config)
        : problem_(problem),
          config_(config),
          rng_(mix_seed(config.seed, {0x6e73676132ULL})),  // "nsga2"
          mutation_prob_(config.mutation_prob < 0.0
                             ? 1.0 / static_cast<double>(problem.dimension)
                             : config.mutation_prob) {
        validate();
    }

    MooResult run(const GenerationObserver& observer, std::span<const double> hv_reference) {
        init_population();
        rank_population();
        for (std::size_t gen = 1; gen <= config_.generations; ++gen) {
            std::vector<Individual> offspring = make_offspring();
            pop_.insert(pop_.end(), std::make_move_iterator(offspring.begin()),
                        std::make_move_iterator(offspring.end()));
            environmental_selection();
            if (observer) observer(collect_stats(gen, hv_reference));
        }
        return finish();
    }

private:
    void validate() const {
        if (problem_.dimension == 0) throw InvalidArgument("moo: dimension must be positive");
        if (problem_.lower.size() != problem_.dimension ||
            problem_.upper.size() != problem_.dimension)
            throw InvalidArgument("moo: bounds length mismatch");
        for (std::size_t j = 0; j < problem_.dimension; ++j) {
            if (!std::isfinite(problem_.lower[j]) || !std::isfinite(problem_.upper[j]) ||
                !(problem_.lower[j] < problem_.upper[j]))
                throw InvalidArgument("moo: bounds must be finite with lower < upper");
        }
        if (problem_.n_objectives == 0 || !problem_.objectives)
            throw InvalidArgument("moo: objective evaluator missing");
        if (config_.population < 4 || config_.population % 2 != 0)
            throw InvalidArgument("moo: population must be even and at least 4");
        if (config_.generations == 0) throw InvalidArgument("moo: generations must be >= 1");
        if (config_.crossover_prob < 0.0 || config_.crossover_prob > 1.0 ||
            mutation_prob_ < 0.0 || mutation_prob_ > 1.0)
            throw InvalidArgument("moo: probabilities must lie in [0, 1]");
        if (config_.sbx_eta <= 0.0 || config_.mutation_eta <= 0.0)
            throw InvalidArgument("moo: distribution indices must be positive");
    }

    double clip(double v, std::size_t j) const {
        return std::min(std::max(v, problem_.lower[j]), problem_.upper[j]);
    }

    void evaluate(Individual& ind) const {
        ind.objectives = problem_.objectives(ind.genome);
        if (ind.objectives.size() != problem_.n_objectives)
            throw RunError("moo: objective evaluator returned wrong arity");
        for (double f : ind.objectives) {
            if (!std::isfinite(f))
                throw RunError("moo: non-finite objective at genome " +
                               format_genome(ind.genome));
        }
        ind.total_violation = 0.0;
        if (problem_.constraints) {
            for (double v : problem_.constraints(ind.genome)) {
                if (!std::isfinite(v))
                    throw RunError("moo: non-finite constraint violation at genome " +
                                   format_genome(ind.genome));
                ind.total_violation += std::max(0.0, v);
            }
        }
    }

    void init_population() {
        pop_.resize(config_.population);
        for (auto& ind : pop_) {
            ind.genome.resize(problem_.dimension);
            for (std::size_t j = 0; j < problem_.dimension; ++j)
                ind.genome[j] = rng_.uniform(problem_.lower[j], problem_.upper[j]);
        }
        if (config_.initial_point) {
            if (config_.initial_point->size() != problem_.dimension)
                throw InvalidArgument("moo: initial point dimension mismatch");
            for (std::size_t j = 0; j < problem_.dimension; ++j)
                pop_[0].genome[j] = clip((*config_.initial_point)[j], j);
        }
        for (auto& ind : pop_) evaluate(ind);
    }

    void rank_population() {
        auto fronts = fast_nondominated_sort(pop_);
        for (const auto& front : fronts) assign_crowding(front);
    }

    void assign_crowding(const std::vector<std::size_t>& front) {
        std::vector<Individual> members;
        members.reserve(front.size());
        for (std::size_t i : front) members.push_back(pop_[i]);
        const auto dist = crowding_distance(members);
        for (std::size_t i = 0; i < front.size(); ++i) pop_[front[i]].crowding = dist[i];
    }

    // True when a is strictly preferred under the crowded-comparison rule.
    bool better(const Individual& a, const Individual& b) const {
        const bool fa = a.feasible();
        const bool fb = b.feasible();
        if (fa != fb) return fa;
        if (!fa) return a.total_violation < b.total_violation;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.crowding > b.crowding;
    }

    const Individual& tournament() {
        const auto i = static_cast<std::size_t>(rng_.below(pop_.size()));
        const auto j = static_cast<std::size_t>(rng_.below(pop_.size()));
        if (better(pop_[i], pop_[j])) return pop_[i];
        if (better(pop_[j], pop_[i])) return pop_[j];
        return rng_.uniform01() < 0.5 ? pop_[i] : pop_[j];
    }

    std::pair<std::vector<double>, std::vector<double>> sbx(const std::vector<double>& p1,
                                                            const std::vector<double>& p2) {
        std::vector<double> c1 = p1, c2 = p2;
        if (rng_.uniform01() > config_.crossover_prob) return {c1, c2};
        const double eta = config_.sbx_eta;
        for (std::size_t j = 0; j < problem_.dimension; ++j) {
            if (rng_.uniform01() > 0.5) continue;
            const double x1 = p1[j], x2 = p2[j];
            if (std::abs(x1 - x2) <= 1e-14) continue;
            const double y1 = std::min(x1, x2);
            const double y2 = std::max(x1, x2);
            const double yl = problem_.lower[j];
            const double yu = problem_.upper[j];
            const double r = rng_.uniform01();

            auto spread = [&](double beta) {
                const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
                if (r <= 1.0 / alpha) return std::pow(r * alpha, 1.0 / (eta + 1.0));
                return std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta + 1.0));
            };
            const double betaq1 = spread(1.0 + 2.0 * (y1 - yl) / (y2 - y1));
            double v1 = 0.5 * ((y1 + y2) - betaq1 * (y2 - y1));
            const double betaq2 = spread(1.0 + 2.0 * (yu - y2) / (y2 - y1));
            double v2 = 0.5 * ((y1 + y2) + betaq2 * (y2 - y1));
            v1 = clip(v1, j);
            v2 = clip(v2, j);
            if (rng_.uniform01() <= 0.5) std::swap(v1, v2);
            c1[j] = v1;
            c2[j] = v2;
        }
        return {c1, c2};
    }

    void mutate(std::vector<double>& genome) {
        const double eta = config_.mutation_eta;
        for (std::size_t j = 0; j < problem_.dimension; ++j) {
            if (rng_.uniform01() > mutation_prob_) continue;
            const double yl = problem_.lower[j];
            const double yu = problem_.upper[j];
            const double y = genome[j];
            const double span = yu - yl;
            const double r = rng_.uniform01();
            const double mut_pow = 1.0 / (eta + 1.0);
            double deltaq;
            if (r <= 0.5) {
                const double xy = 1.0 - (y - yl) / span;
                const double val = 2.0 * r + (1.0 - 2.0 * r) * std::pow(xy, eta + 1.0);
                deltaq = std::pow(val, mut_pow) - 1.0;
            } else {
                const double xy = 1.0 - (yu - y) / span;
                const double val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(xy, eta + 1.0);
                deltaq = 1.0 - std::pow(val, mut_pow);
            }
            genome[j] = clip(y + deltaq * span, j);
        }
    }

    std::vector<Individual> make_offspring() {
        std::vector<Individual> children;
        children.reserve(config_.population);
        while (children.size() < config_.population) {
            const auto& p1 = tournament().genome;
            const auto& p2 = tournament().genome;
            auto [g1, g2] = sbx(p1, p2);
            mutate(g1);
            mutate(g2);
            Individual c1;
            c1.genome = std::move(g1);
            evaluate(c1);
            children.push_back(std::move(c1));
            if (children.size() < config_.population) {
                Individual c2;
                c2.genome = std::move(g2);
                evaluate(c2);
                children.push_back(std::move(c2));
            }
        }
        return children;
    }

    void environmental_selection() {
        auto fronts = fast_nondominated_sort(pop_);
        std::vector<Individual> next;
        next.reserve(config_.population);
        for (const auto& front : fronts) {
            assign_crowding(front);
            if (next.size() + front.size() <= config_.population) {
                for (std::size_t i : front) next.push_back(std::move(pop_[i]));
                if (next.size() == config_.population) break;
            } else {
                std::vector<std::size_t> order = front;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (pop_[a].crowding != pop_[b].crowding)
                        return pop_[a].crowding > pop_[b].crowding;
                    return a < b;
                });
                const std::size_t need = config_.population - next.size();
                for (std::size_t i = 0; i < need; ++i) next.push_back(std::move(pop_[order[i]]));
                break;
            }
        }
        pop_ = std::move(next);
    }

    GenerationStats collect_stats(std::size_t gen, std::span<const double> hv_reference) const {
        GenerationStats stats;
        stats.generation = gen;
        stats.best_objective.assign(problem_.n_objectives,
                                    std::numeric_limits<double>::infinity());
        std::vector<std::vector<double>> front_points;
        for (const auto& ind : pop_) {
            if (!ind.feasible()) continue;
            ++stats.feasible_count;
            if (ind.rank != 0) continue;
            front_points.push_back(ind.objectives);
            for (std::size_t l = 0; l < problem_.n_objectives; ++l)
                stats.best_objective[l] = std::min(stats.best_objective[l], ind.objectives[l]);
        }
        if (!hv_reference.empty() && !front_points.empty())
            stats.hypervolume = hypervolume(front_points, hv_reference);
        return stats;
    }

    MooResult finish() {
        MooResult result;
        result.best_violation = std::numeric_limits<double>::infinity();
        for (const auto& ind : pop_) {
            result.best_violation = std::min(result.best_violation, ind.total_violation);
            if (ind.feasible() && ind.rank == 0) result.archive.push_back(ind);
        }
        if (result.archive.empty()) {
            result.feasible = false;
            result.archive = pop_;
        } else {
            result.best_violation = 0.0;
        }
        return result;
    }

    const MooProblem& problem_;
    const MooConfig& config_;
    Rng rng_;
    double mutation_prob_;
    std::vector<Individual> pop_;
};

}  // namespace

MooResult evolve(const MooProblem& problem, const MooConfig& config,
                 const GenerationObserver& observer, std::span<const double> hv_reference) {
    Evolver evolver(problem, config);
    return evolver.run(observer, hv_reference);
}

std::vector<Individual> select_diverse_subset(const std::vector<Individual>& archive,
                                              std::size_t k) {
    if (archive.empty()) throw InvalidArgument("select_diverse_subset: empty archive");
    if (k == 0) throw InvalidArgument("select_diverse_subset: k must be >= 1");
    if (archive.size() <= k) return archive;
    const auto dist = crowding_distance(archive);
    std::vector<std::size_t> order(archive.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    std::vector<Individual> out;
    out.reserve(k);
    for (std::size_t i : order) out.push_back(archive[i]);
    return out;
}

namespace {

double hypervolume_rec(std::vector<std::vector<double>> points, std::span<const double> ref,
                       std::size_t dim) {
    if (points.empty()) return 0.0;
    if (dim == 1) {
        double best = points[0][0];
        for (const auto& p : points) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    const std::size_t last = dim - 1;
    std::sort(points.begin(), points.end(), [last](const auto& a, const auto& b) {
        return a[last] < b[last];
    });
    double volume = 0.0;
    std::vector<std::vector<double>> slice;
    for (std::size_t i = 0; i < points.size(); ++i) {
        slice.push_back(points[i]);
        const double z_low = points[i][last];
        const double z_high = i + 1 < points.size() ? points[i + 1][last] : ref[last];
        if (z_high > z_low) volume += (z_high - z_low) * hypervolume_rec(slice, ref, last);
    }
    return volume;
}

}  // namespace

double hypervolume(const std::vector<std::vector<double>>& points,
                   std::span<const double> reference) {
    if (reference.empty()) throw InvalidArgument("hypervolume: empty reference point");
    std::vector<std::vector<double>> kept;
    for (const auto& p : points) {
        if (p.size() != reference.size())
            throw InvalidArgument("hypervolume: point/reference dimension mismatch");
        bool inside = true;
        for (std::size_t l = 0; l < p.size(); ++l) {
            if (!(p[l] < reference[l])) {
                inside = false;
                break;
            }
        }
        if (inside) kept.push_back(p);
    }
    return hypervolume_rec(std::move(kept), reference, reference.size());
}

void write_trace_csv(const std::vector<GenerationStats>& trace, std::size_t n_objectives,
                     const std::string& path) {
    std::vector<std::string> header = {"generation"};
    for (std::size_t l = 0; l < n_objectives; ++l)
        header.push_back("best_objective_" + std::to_string(l + 1));
    header.push_back("feasible_count");
    header.push_back("hypervolume");
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : trace) {
        std::vector<std::string> row = {std::to_string(s.generation)};
        for (double b : s.best_objective) row.push_back(format_double(b));
        row.push_back(std::to_string(s.feasible_count));
        row.push_back(format_double(s.hypervolume));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

}  // namespace pce
