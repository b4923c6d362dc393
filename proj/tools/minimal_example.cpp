// Plan and run the five-node exact system at three levels per coordinate.

#include <iostream>

#include "qlinsolve/planner.hpp"
#include "qlinsolve/reference_data.hpp"
#include "qlinsolve/solver.hpp"

int main() {
  const qls::Network net(qls::reference::example1_problem(), qls::reference::fig1_graph());
  const auto plan = qls::plan_exact(3, 0.5, net.spectra, 0.5, std::pair{0.0, 3.0});
  qls::ExactConfig cfg;
  cfg.h = plan.h;
  cfg.alpha = plan.alpha;
  cfg.K = plan.K;
  cfg.s0 = plan.s0_min->value();
  cfg.max_rounds = 20000;
  const auto tr = qls::run_exact_on(net, cfg);
  std::cout << "h = " << plan.h << ", alpha = " << plan.alpha << ", s0 = " << cfg.s0 << "\n"
            << "rounds " << tr.rounds_executed() << ", final err2 " << tr.last().err2
            << ", saturated " << tr.saturation_total << ", bits " << tr.last().bits_cum << "\n";
}
