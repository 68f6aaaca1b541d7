#include "flsim/task.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <random>

namespace flsim {

long work_units_for(int cardinality, int epochs, int batch) {
    const long total = static_cast<long>(cardinality) * epochs;
    return (total + batch - 1) / batch;
}

namespace {

Matrix random_spd(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();

    // Eigenvalues log-uniform in [0.2, 5]; condition number at most 25.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector eigenvalues(dim);
    for (int i = 0; i < dim; ++i)
        eigenvalues(i) = std::exp(std::log(0.2) + unit(rng) * (std::log(5.0) - std::log(0.2)));

    Matrix a = q * eigenvalues.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

}  // namespace

FederatedTask generate_task(int n_clients, int dim, double spread,
                            const std::vector<int>& cardinalities,
                            std::uint64_t seed) {
    if (n_clients < 1) throw EmptyClients();
    if (dim < 1) throw InvalidDimension();
    if (static_cast<int>(cardinalities.size()) != n_clients)
        throw Error("cardinalities list must have one entry per client");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> box(-1.0, 1.0);

    Vector center(dim);
    for (int i = 0; i < dim; ++i) center(i) = box(rng);

    FederatedTask task;
    task.dim = dim;
    task.cardinality = cardinalities;
    task.curvature.reserve(n_clients);
    task.local_optimum.reserve(n_clients);
    for (int c = 0; c < n_clients; ++c) {
        Vector theta(dim);
        for (int i = 0; i < dim; ++i) theta(i) = center(i) + spread * gauss(rng);
        task.local_optimum.push_back(std::move(theta));
        task.curvature.push_back(random_spd(dim, rng));
    }
    return task;
}

Vector local_gradient(const FederatedTask& task, ClientId client,
                      const Vector& w, double prox_mu, const Vector& anchor) {
    if (client < 0 || client >= task.num_clients()) throw UnknownClient();
    if (w.size() != task.dim) throw DimensionMismatch();
    Vector grad = task.curvature[client] * (w - task.local_optimum[client]);
    if (prox_mu > 0.0) {
        if (anchor.size() != task.dim) throw DimensionMismatch();
        grad += prox_mu * (w - anchor);
    }
    return grad;
}

LocalTrainResult local_train(const FederatedTask& task, ClientId client,
                             const ModelParams& w, int epochs, int batch,
                             double lr, double prox_mu,
                             const ModelParams& anchor) {
    if (client < 0 || client >= task.num_clients()) throw UnknownClient();
    if (w.size() != task.dim) throw DimensionMismatch();
    if (lr <= 0.0) throw Error("learning rate must be positive");

    const long steps = work_units_for(task.cardinality[client], epochs, batch);
    Vector current = w;
    for (long s = 0; s < steps; ++s)
        current -= lr * local_gradient(task, client, current, prox_mu, anchor);
    return {std::move(current), steps};
}

LossValue global_loss(const FederatedTask& task, const ModelParams& w) {
    if (w.size() != task.dim) throw DimensionMismatch();
    double total = 0.0;
    for (int n : task.cardinality) total += n;
    double loss = 0.0;
    for (int c = 0; c < task.num_clients(); ++c) {
        const Vector d = w - task.local_optimum[c];
        loss += (task.cardinality[c] / total) * 0.5 * d.dot(task.curvature[c] * d);
    }
    return loss;
}

ModelParams closed_form_optimum(const FederatedTask& task) {
    if (task.num_clients() == 0) throw EmptyClients();
    double total = 0.0;
    for (int n : task.cardinality) total += n;

    Matrix system = Matrix::Zero(task.dim, task.dim);
    Vector rhs = Vector::Zero(task.dim);
    for (int c = 0; c < task.num_clients(); ++c) {
        const double weight = task.cardinality[c] / total;
        system += weight * task.curvature[c];
        rhs += weight * (task.curvature[c] * task.local_optimum[c]);
    }

    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) throw SingularSystem();
    Vector optimum = llt.solve(rhs);
    if ((system * optimum - rhs).norm() > 1e-10 * std::max(1.0, rhs.norm()))
        throw SingularSystem();
    return optimum;
}

}  // namespace flsim
