#pragma once

#include "flsim/types.hpp"

#include <cstdint>
#include <vector>

namespace flsim {

struct InvalidDimension : Error {
    InvalidDimension() : Error("task dimension must be >= 1") {}
};

struct EmptyClients : Error {
    EmptyClients() : Error("task needs at least one client") {}
};

struct UnknownClient : Error {
    UnknownClient() : Error("client id out of range for this task") {}
};

struct SingularSystem : Error {
    SingularSystem() : Error("global curvature system could not be solved") {}
};

// Synthetic federated optimization problem. Each client owns a strictly
// convex quadratic
//     f_c(w) = 1/2 (w - theta_c)^T A_c (w - theta_c)
// and the global objective is the cardinality-weighted mixture of the client
// objectives. The closed-form optimum makes convergence claims checkable.
struct FederatedTask {
    int dim = 0;
    std::vector<Matrix> curvature;      // A_c, symmetric positive definite
    std::vector<Vector> local_optimum;  // theta_c
    std::vector<int> cardinality;       // n_c

    int num_clients() const { return static_cast<int>(curvature.size()); }
};

using LossValue = double;

struct LocalTrainResult {
    ModelParams params;
    long work_units;
};

// Gradient steps a client performs per invocation: ceil(n_c * epochs / batch).
long work_units_for(int cardinality, int epochs, int batch);

// Builds a deterministic task: theta_c scattered around a common center with
// the given dispersion, A_c random SPD with condition number <= 100.
FederatedTask generate_task(int n_clients, int dim, double spread,
                            const std::vector<int>& cardinalities,
                            std::uint64_t seed);

// Analytic gradient of the (optionally proximal) local objective at w.
Vector local_gradient(const FederatedTask& task, ClientId client,
                      const Vector& w, double prox_mu, const Vector& anchor);

// Full-batch gradient descent for work_units_for(...) steps on
// f_c(w) + prox_mu/2 * |w - anchor|^2. Deterministic.
LocalTrainResult local_train(const FederatedTask& task, ClientId client,
                             const ModelParams& w, int epochs, int batch,
                             double lr, double prox_mu,
                             const ModelParams& anchor);

LossValue global_loss(const FederatedTask& task, const ModelParams& w);

// Direct solve of (sum_c (n_c/n) A_c) w = sum_c (n_c/n) A_c theta_c.
ModelParams closed_form_optimum(const FederatedTask& task);

}  // namespace flsim
