#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace flsim {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Clients are numbered 0..n-1 within a scenario, so the id doubles as an
// index into per-client tables.
using ClientId = int;

// Dense model parameter vector; dimension is fixed within a run.
using ModelParams = Vector;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Errors shared by more than one module.
struct DimensionMismatch : Error {
    DimensionMismatch() : Error("vector dimensions do not match") {}
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct InvalidRound : Error {
    explicit InvalidRound(const std::string& what) : Error(what) {}
};

struct NoAvailableClients : Error {
    NoAvailableClients() : Error("no available clients to select from") {}
};

struct NoHistory : Error {
    NoHistory() : Error("client has no recorded training durations") {}
};

}  // namespace flsim
