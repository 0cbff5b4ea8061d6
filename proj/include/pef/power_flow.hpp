#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pef/error.hpp"
#include "pef/grid.hpp"

namespace pef {

struct DcFlowSolution {
  std::vector<double> angles;      // rad, per bus in topology order; slack = 0
  std::vector<double> line_flows;  // pu, per line in topology order; from -> to
};

// DC power flow with a prefactorized reduced susceptance matrix, so a fixed
// (possibly post-trip) topology can be solved once per time slot cheaply.
class DcFlowSolver {
 public:
  DcFlowSolver(const GridTopology& topo, const std::vector<bool>& line_active)
      : topo_(&topo), line_active_(line_active) {
    const std::size_t n = topo.buses.size();
    if (!detail::connected(topo, &line_active_))
      throw Error("singular system", "grid is disconnected; reduced susceptance matrix is singular");
    slack_idx_ = topo.bus_index(topo.slack_bus);
    // Reduced index map: all buses except slack.
    reduced_of_.assign(n, -1);
    int r = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != slack_idx_) reduced_of_[i] = r++;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (std::size_t li = 0; li < topo.lines.size(); ++li) {
      if (!line_active_[li]) continue;
      const auto& l = topo.lines[li];
      const double susceptance = 1.0 / l.reactance;
      const int ri = reduced_of_[topo.bus_index(l.from)];
      const int rj = reduced_of_[topo.bus_index(l.to)];
      if (ri >= 0) b(ri, ri) += susceptance;
      if (rj >= 0) b(rj, rj) += susceptance;
      if (ri >= 0 && rj >= 0) {
        b(ri, rj) -= susceptance;
        b(rj, ri) -= susceptance;
      }
    }
    llt_.compute(b);
    if (llt_.info() != Eigen::Success)
      throw Error("singular system", "reduced susceptance matrix failed factorization");
  }

  explicit DcFlowSolver(const GridTopology& topo)
      : DcFlowSolver(topo, std::vector<bool>(topo.lines.size(), true)) {}

  // Injections are per bus in topology order; the slack entry is overwritten
  // so the system balances.
  DcFlowSolution solve(const std::vector<double>& injections) const {
    const auto& topo = *topo_;
    const std::size_t n = topo.buses.size();
    if (injections.size() != n)
      throw Error("dimension mismatch", "injection vector length != bus count");
    Eigen::VectorXd p(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      if (reduced_of_[i] >= 0) p(reduced_of_[i]) = injections[i];
    const Eigen::VectorXd theta_reduced = llt_.solve(p);
    DcFlowSolution sol;
    sol.angles.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (reduced_of_[i] >= 0) sol.angles[i] = theta_reduced(reduced_of_[i]);
    sol.line_flows.assign(topo.lines.size(), 0.0);
    for (std::size_t li = 0; li < topo.lines.size(); ++li) {
      if (!line_active_[li]) continue;
      const auto& l = topo.lines[li];
      sol.line_flows[li] = (sol.angles[topo.bus_index(l.from)] -
                            sol.angles[topo.bus_index(l.to)]) /
                           l.reactance;
    }
    return sol;
  }

  // Slack injection implied by balance.
  static double slack_injection(const GridTopology& topo,
                                const std::vector<double>& injections) {
    double sum = 0.0;
    const auto slack_idx = topo.bus_index(topo.slack_bus);
    for (std::size_t i = 0; i < injections.size(); ++i)
      if (i != slack_idx) sum += injections[i];
    return -sum;
  }

 private:
  const GridTopology* topo_;
  std::vector<bool> line_active_;
  std::size_t slack_idx_;
  std::vector<int> reduced_of_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline DcFlowSolution dc_power_flow(const GridTopology& topo,
                                    const std::vector<double>& injections) {
  return DcFlowSolver(topo).solve(injections);
}

}  // namespace pef
