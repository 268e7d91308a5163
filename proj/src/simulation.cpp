#include "plrm/simulation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <json.hpp>

namespace plrm {

void SimDesign::validate() const {
    if (beta_true.size() != dims().nu())
        throw contract_error("SimDesign: beta_true has wrong length");
    if (N < 10) throw contract_error("SimDesign: need N >= 10");
    if (!(contamination_pct >= 0.0 && contamination_pct < 100.0))
        throw contract_error("SimDesign: contamination percentage must lie in [0, 100)");
}

Dataset generate_pure(const SimDesign& design, RngStream& rng) {
    design.validate();
    Dataset data;
    data.dims = design.dims();
    data.X.resize(design.N, design.k + 1);
    data.Y = IMatrix::Zero(design.N, design.d + 1);
    data.trials = IVector::Ones(design.N);
    for (int i = 0; i < design.N; ++i) {
        data.X(i, 0) = 1.0;
        for (int u = 1; u <= design.k; ++u) data.X(i, u) = rng.next_normal();
    }
    Vector eta, pi;
    for (int i = 0; i < design.N; ++i) {
        category_probabilities_into(data.X.row(i), design.beta_true, data.dims,
                                    eta, pi);
        data.Y(i, rng.next_category(pi)) = 1;
    }
    return data;
}

Dataset contaminate(const Dataset& data, const SimDesign& design, RngStream& rng) {
    Dataset out = data;
    const double p = design.contamination_pct;
    if (p == 0.0) return out;
    const int n = static_cast<int>(data.rows());
    const int cats = design.d + 1;
    int first;  // 0-based first contaminated row
    if (design.code_compat) {
        first = static_cast<int>(std::floor((1.0 - p / 100.0) * n)) - 1;
        if (first < 0) first = 0;
    } else {
        const int block = static_cast<int>(std::ceil(p * n / 100.0));
        first = n - block;
    }
    Vector eta, pi, shifted(cats);
    for (int i = first; i < n; ++i) {
        if (design.code_compat) {
            IVector y(cats);
            for (int j = 0; j < cats; ++j) y[j] = data.Y(i, (j + design.d) % cats);
            out.Y.row(i) = y;
        } else {
            if (data.trials[i] != 1)
                throw contract_error("contaminate: redraw mode needs unit-trial rows");
            category_probabilities_into(data.X.row(i), design.beta_true,
                                        data.dims, eta, pi);
            for (int j = 0; j < cats; ++j) shifted[j] = pi[(j + design.d) % cats];
            out.Y.row(i).setZero();
            out.Y(i, rng.next_category(shifted)) = 1;
        }
    }
    return out;
}

int default_thread_count() {
    if (const char* env = std::getenv("PLRM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

RngStream replication_stream(std::uint64_t seed, std::size_t n_index, int rep,
                             int purpose) {
    const std::uint64_t id = (static_cast<std::uint64_t>(n_index + 1) << 44) ^
                             (static_cast<std::uint64_t>(rep + 1) << 4) ^
                             static_cast<std::uint64_t>(purpose);
    return RngStream(seed, id);
}

namespace {

enum class Kind { mse, level, power };

struct RepSlot {
    double value = 0.0;
    bool valid = false;
    Vector coords;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

StudyResult run_study(const SimDesign& design, const std::vector<double>& lambdas,
                      const std::vector<int>& n_grid, int reps, Kind kind,
                      const LinearHypothesis* hyp, double alpha, int threads) {
    design.validate();
    if (reps < 1) throw contract_error("study: need reps >= 1");
    if (lambdas.empty() || n_grid.empty())
        throw contract_error("study: empty lambda or N grid");
    if (kind != Kind::mse && hyp == nullptr)
        throw contract_error("study: level/power study needs a hypothesis");
    if (threads <= 0) threads = default_thread_count();

    const std::size_t n_cells = n_grid.size() * lambdas.size();
    std::vector<RepSlot> slots(n_cells * static_cast<std::size_t>(reps));
    auto slot_index = [&](std::size_t n_idx, std::size_t l_idx, int rep) {
        return (n_idx * lambdas.size() + l_idx) * static_cast<std::size_t>(reps) +
               static_cast<std::size_t>(rep);
    };
    const double crit =
        kind == Kind::mse ? 0.0 : chisq_quantile(1.0 - alpha, hyp->r());

    std::atomic<std::size_t> next{0};
    const std::size_t total_jobs = n_grid.size() * static_cast<std::size_t>(reps);
    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total_jobs) return;
            const std::size_t n_idx = job / static_cast<std::size_t>(reps);
            const int rep = static_cast<int>(job % static_cast<std::size_t>(reps));
            SimDesign local = design;
            local.N = n_grid[n_idx];
            RngStream gen = replication_stream(design.seed, n_idx, rep, 0);
            Dataset data = generate_pure(local, gen);
            if (local.contamination_pct > 0.0) {
                RngStream crng = replication_stream(design.seed, n_idx, rep, 1);
                data = contaminate(data, local, crng);
            }
            for (std::size_t l_idx = 0; l_idx < lambdas.size(); ++l_idx) {
                RepSlot& slot = slots[slot_index(n_idx, l_idx, rep)];
                try {
                    FitOptions opts;
                    const FitResult fit = fit_mdpde(data, lambdas[l_idx], opts);
                    if (!fit.converged || !fit.sandwich_ok) continue;
                    if (kind == Kind::mse) {
                        const Vector err = fit.beta_hat - design.beta_true;
                        slot.value = err.squaredNorm();
                        slot.coords = err.cwiseAbs2();
                    } else {
                        const WaldResult w = wald_statistic(fit, *hyp);
                        slot.value = w.statistic > crit ? 1.0 : 0.0;
                    }
                    slot.valid = true;
                } catch (const singular_information&) {
                } catch (const singular_contrast&) {
                }
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    StudyResult out;
    out.metric = kind == Kind::mse ? "mse" : (kind == Kind::level ? "level" : "power");
    const int nu = design.dims().nu();
    for (std::size_t n_idx = 0; n_idx < n_grid.size(); ++n_idx) {
        for (std::size_t l_idx = 0; l_idx < lambdas.size(); ++l_idx) {
            StudyCell cell;
            cell.lambda = lambdas[l_idx];
            cell.N = n_grid[n_idx];
            cell.per_coordinate = Vector::Zero(nu);
            double sum = 0.0, sum_sq = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                const RepSlot& slot = slots[slot_index(n_idx, l_idx, rep)];
                if (!slot.valid) {
                    ++cell.discarded;
                    continue;
                }
                ++cell.valid_replications;
                sum += slot.value;
                sum_sq += slot.value * slot.value;
                if (kind == Kind::mse) cell.per_coordinate += slot.coords;
            }
            if (cell.valid_replications == 0)
                throw study_failed("study: every replication discarded at lambda = " +
                                   format_double(cell.lambda) +
                                   ", N = " + std::to_string(cell.N));
            const double m = static_cast<double>(cell.valid_replications);
            cell.value = sum / m;
            if (cell.valid_replications > 1) {
                const double var =
                    std::max(0.0, (sum_sq - m * cell.value * cell.value) / (m - 1.0));
                cell.std_error = std::sqrt(var / m);
            }
            if (kind == Kind::mse)
                cell.per_coordinate /= m;
            else
                cell.per_coordinate.resize(0);
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

}  // namespace

std::string StudyResult::to_csv() const {
    std::string csv = "lambda,N,metric,value,valid_reps,discarded\n";
    for (const auto& c : cells) {
        csv += format_double(c.lambda) + "," + std::to_string(c.N) + "," + metric +
               "," + format_double(c.value) + "," +
               std::to_string(c.valid_replications) + "," +
               std::to_string(c.discarded) + "\n";
        for (Eigen::Index j = 0; j < c.per_coordinate.size(); ++j)
            csv += format_double(c.lambda) + "," + std::to_string(c.N) + "," +
                   metric + "_coord_" + std::to_string(j) + "," +
                   format_double(c.per_coordinate[j]) + "," +
                   std::to_string(c.valid_replications) + "," +
                   std::to_string(c.discarded) + "\n";
    }
    return csv;
}

std::string StudyResult::to_json() const {
    nlohmann::ordered_json j;
    j["metric"] = metric;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json cell;
        cell["lambda"] = c.lambda;
        cell["N"] = c.N;
        cell["value"] = c.value;
        cell["std_error"] = c.std_error;
        cell["valid_reps"] = c.valid_replications;
        cell["discarded"] = c.discarded;
        if (c.per_coordinate.size() > 0) {
            cell["per_coordinate"] = std::vector<double>(
                c.per_coordinate.data(), c.per_coordinate.data() + c.per_coordinate.size());
        }
        j["cells"].push_back(std::move(cell));
    }
    return j.dump(2) + "\n";
}

StudyResult mse_study(const SimDesign& design, const std::vector<double>& lambdas,
                      const std::vector<int>& n_grid, int reps, int threads) {
    return run_study(design, lambdas, n_grid, reps, Kind::mse, nullptr, 0.05,
                     threads);
}

StudyResult level_study(const SimDesign& design, const std::vector<double>& lambdas,
                        const std::vector<int>& n_grid, int reps,
                        const LinearHypothesis& hyp, double alpha, int threads) {
    return run_study(design, lambdas, n_grid, reps, Kind::level, &hyp, alpha,
                     threads);
}

StudyResult power_study(const SimDesign& design, const std::vector<double>& lambdas,
                        const std::vector<int>& n_grid, int reps,
                        const LinearHypothesis& hyp, double alpha, int threads) {
    return run_study(design, lambdas, n_grid, reps, Kind::power, &hyp, alpha,
                     threads);
}

}  // namespace plrm
