#include "kpinn/tape.hpp"

namespace kpinn {

std::vector<double> Tape::gradient(const Var& output) const {
  std::vector<double> adj(size(), 0.0);
  if (!output.tracked()) return adj;  // constant-folded output: zero gradient
  adj[static_cast<std::size_t>(output.idx)] = 1.0;
  for (int i = static_cast<int>(size()) - 1; i >= 0; --i) {
    const double a = adj[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const int pa = p0_[static_cast<std::size_t>(i)];
    const int pb = p1_[static_cast<std::size_t>(i)];
    if (pa >= 0) adj[static_cast<std::size_t>(pa)] += w0_[static_cast<std::size_t>(i)] * a;
    if (pb >= 0) adj[static_cast<std::size_t>(pb)] += w1_[static_cast<std::size_t>(i)] * a;
  }
  return adj;
}

}  // namespace kpinn
