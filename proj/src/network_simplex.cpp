// Primal network simplex for the transportation problem on a complete
// bipartite graph. The spanning-tree bookkeeping (thread / rev_thread /
// succ_num / last_succ) follows the LEMON NetworkSimplex layout; arcs are
// implicit (arc e = i * m + j) and all capacities are infinite, so the only
// non-tree state is "at lower bound".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "wbounds/transport.hpp"

namespace wbounds {

namespace {

constexpr int kUp = 1;
constexpr int kDown = -1;

class NetworkSimplex {
 public:
  NetworkSimplex(const VectorXd& supply, const VectorXd& demand, const RowMatrixXd& cost)
      : n_(supply.size()),
        m_(demand.size()),
        root_(n_ + m_),
        num_arcs_(n_ * m_),
        art_arc_(n_ * m_),
        supply_(supply),
        demand_(demand),
        cost_(cost.data()) {
    const Index nodes = n_ + m_ + 1;
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    pred_dir_.assign(nodes, kUp);
    pred_flow_.assign(nodes, 0.0);
    thread_.assign(nodes, 0);
    rev_thread_.assign(nodes, 0);
    succ_num_.assign(nodes, 0);
    last_succ_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    state_.assign(static_cast<std::size_t>(num_arcs_), 1);

    double max_cost = 0.0;
    for (Index e = 0; e < num_arcs_; ++e) max_cost = std::max(max_cost, std::abs(cost_[e]));
    eps_ = 1e-13 * std::max(1.0, max_cost);
    block_size_ = std::max<Index>(10, static_cast<Index>(std::ceil(std::sqrt(double(num_arcs_)))));
    degenerate_limit_ = 10 * (n_ + m_);
    pivot_limit_ = 50 * (n_ + m_) * (n_ + m_);
  }

  void run() {
    init_northwest_tree();
    for (int round = 0;; ++round) {
      pivot_loop();
      // Rebuild potentials from the tree to shed accumulated drift, then
      // confirm no arc prices out; otherwise keep pivoting.
      recompute_potentials();
      if (!find_entering_bland()) break;
      if (round > 100) throw Error(ErrorCode::IterationLimit, "potential refresh did not settle");
    }
  }

  Index pivots() const { return pivots_; }

  double value() const {
    double v = 0.0;
    for (Index u = 0; u < n_ + m_; ++u)
      if (pred_[u] != art_arc_ && pred_flow_[u] > 0.0) v += pred_flow_[u] * cost(pred_[u]);
    return v;
  }

  // Tree arcs with positive flow as (support row, support col, flow).
  std::vector<Triplet> flows() const {
    std::vector<Triplet> out;
    for (Index u = 0; u < n_ + m_; ++u) {
      const Index e = pred_[u];
      if (e != art_arc_ && pred_flow_[u] > 0.0) out.emplace_back(e / m_, e % m_, pred_flow_[u]);
    }
    return out;
  }

  // Kantorovich potentials: f_i = -pi_i, g_j = pi_{n+j}, so that
  // C_ij - f_i - g_j is the reduced cost.
  void potentials(VectorXd& f, VectorXd& g) const {
    f.resize(n_);
    g.resize(m_);
    for (Index i = 0; i < n_; ++i) f[i] = -pi_[i];
    for (Index j = 0; j < m_; ++j) g[j] = pi_[n_ + j];
  }

 private:
  Index source(Index e) const { return e == art_arc_ ? 0 : e / m_; }
  Index target(Index e) const { return e == art_arc_ ? root_ : n_ + e % m_; }
  double cost(Index e) const { return e == art_arc_ ? 0.0 : cost_[e]; }

  // Northwest-corner basic feasible solution: exactly n + m - 1 arcs forming
  // a staircase spanning tree. Node 0 hangs off the artificial root through
  // a zero-cost arc that never enters a cycle.
  void init_northwest_tree() {
    std::vector<double> rs(supply_.data(), supply_.data() + n_);
    std::vector<double> rd(demand_.data(), demand_.data() + m_);
    std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n_ + m_));
    Index i = 0, j = 0;
    while (true) {
      const double x = std::max(0.0, std::min(rs[i], rd[j]));
      rs[i] -= x;
      rd[j] -= x;
      const Index e = i * m_ + j;
      adj[i].emplace_back(e, x);
      adj[n_ + j].emplace_back(e, x);
      state_[e] = 0;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (i == n_ - 1) {
        ++j;
      } else if (j == m_ - 1) {
        ++i;
      } else if (rs[i] <= rd[j]) {
        ++i;
      } else {
        ++j;
      }
    }

    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n_ + m_));
    std::vector<Index> stack{0};
    std::vector<char> seen(static_cast<std::size_t>(n_ + m_), 0);
    seen[0] = 1;
    parent_[0] = root_;
    pred_[0] = art_arc_;
    pred_dir_[0] = kUp;
    pred_flow_[0] = 0.0;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      order.push_back(u);
      // Reverse so children are visited in arc order.
      for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
        const auto [e, x] = *it;
        const Index v = (u < n_) ? target(e) : source(e);
        if (seen[v]) continue;
        seen[v] = 1;
        parent_[v] = u;
        pred_[v] = e;
        pred_dir_[v] = (v == source(e)) ? kUp : kDown;
        pred_flow_[v] = x;
        stack.push_back(v);
      }
    }

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = order.front();
    rev_thread_[order.front()] = root_;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      thread_[order[k]] = order[k + 1];
      rev_thread_[order[k + 1]] = order[k];
    }
    thread_[order.back()] = root_;
    rev_thread_[root_] = order.back();

    std::vector<Index> pos(static_cast<std::size_t>(n_ + m_));
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<Index>(k);
    for (Index u = 0; u < n_ + m_; ++u) succ_num_[u] = 1;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (parent_[*it] != root_) succ_num_[parent_[*it]] += succ_num_[*it];
    for (Index u = 0; u < n_ + m_; ++u) last_succ_[u] = order[pos[u] + succ_num_[u] - 1];
    succ_num_[root_] = n_ + m_ + 1;
    last_succ_[root_] = order.back();

    recompute_potentials();
  }

  void recompute_potentials() {
    pi_[root_] = 0.0;
    for (Index u = thread_[root_]; u != root_; u = thread_[u]) {
      const double c = cost(pred_[u]);
      pi_[u] = pred_dir_[u] == kUp ? pi_[parent_[u]] - c : pi_[parent_[u]] + c;
    }
  }

  double reduced_cost(Index i, Index j, Index e) const { return cost_[e] + pi_[i] - pi_[n_ + j]; }

  bool find_entering_block() {
    double best = -eps_;
    Index in = -1;
    Index e = next_arc_;
    Index i = e / m_, j = e % m_;
    Index cnt = block_size_;
    for (Index scanned = 0; scanned < num_arcs_; ++scanned) {
      if (state_[e]) {
        const double c = reduced_cost(i, j, e);
        if (c < best) {
          best = c;
          in = e;
        }
      }
      if (++j == m_) {
        j = 0;
        ++i;
      }
      if (++e == num_arcs_) {
        e = 0;
        i = 0;
        j = 0;
      }
      if (--cnt == 0) {
        if (in >= 0) break;
        cnt = block_size_;
      }
    }
    if (in < 0) return false;
    in_arc_ = in;
    next_arc_ = e;
    return true;
  }

  // Bland's rule: lowest-index arc with negative reduced cost.
  bool find_entering_bland() {
    for (Index i = 0, e = 0; i < n_; ++i) {
      for (Index j = 0; j < m_; ++j, ++e) {
        if (state_[e] && reduced_cost(i, j, e) < -eps_) {
          in_arc_ = e;
          return true;
        }
      }
    }
    return false;
  }

  void find_join() {
    Index u = source(in_arc_), v = target(in_arc_);
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  // Ratio test along the cycle; ties on the first path prefer the arc
  // closest to the apex, keeping the tree strongly feasible. Under Bland's
  // rule ties go to the lowest arc index instead.
  void find_leaving() {
    const Index first = source(in_arc_), second = target(in_arc_);
    delta_ = std::numeric_limits<double>::infinity();
    int result = 0;
    for (Index u = first; u != join_; u = parent_[u]) {
      if (pred_dir_[u] != kUp) continue;
      const double d = pred_flow_[u];
      if (d < delta_ || (bland_ && d == delta_ && pred_[u] < pred_[u_out_])) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (Index u = second; u != join_; u = parent_[u]) {
      if (pred_dir_[u] != kDown) continue;
      const double d = pred_flow_[u];
      const bool take = bland_ ? (d < delta_ || (d == delta_ && pred_[u] < pred_[u_out_]))
                               : d <= delta_;
      if (take) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 0) throw Error(ErrorCode::InvalidArgument, "unbounded transportation cycle");
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
  }

  void change_flow() {
    if (delta_ > 0.0) {
      const double val = delta_;
      for (Index u = source(in_arc_); u != join_; u = parent_[u]) pred_flow_[u] -= pred_dir_[u] * val;
      for (Index u = target(in_arc_); u != join_; u = parent_[u]) pred_flow_[u] += pred_dir_[u] * val;
    }
    pred_flow_[u_out_] = 0.0;
    state_[in_arc_] = 0;
    state_[pred_[u_out_]] = 1;
  }

  void update_tree_structure() {
    const Index old_rev_thread = rev_thread_[u_out_];
    const Index old_succ_num = succ_num_[u_out_];
    const Index old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      pred_flow_[u_in_] = delta_;

      if (thread_[v_in_] != u_out_) {
        Index after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const Index thread_continue =
          old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

      // Re-hang the stem nodes between u_in and u_out.
      Index stem = u_in_;
      Index par_stem = v_in_;
      Index next_stem;
      Index last = last_succ_[u_in_];
      Index before, after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }

      for (Index u : dirty_revs_) rev_thread_[thread_[u]] = u;

      // Shift pred arcs (and their flows) down the reversed stem.
      Index tmp_sc = 0, tmp_ls = last_succ_[u_out_];
      for (Index u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        pred_flow_[u] = pred_flow_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      pred_flow_[u_in_] = delta_;
      succ_num_[u_in_] = old_succ_num;
    }

    const Index up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const Index last_succ_out = last_succ_[u_out_];
    for (Index u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u])
      last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (Index u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (Index u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double c = cost(in_arc_);
    const double sigma = pi_[v_in_] - pi_[u_in_] - (pred_dir_[u_in_] == kUp ? c : -c);
    const Index end = thread_[last_succ_[u_in_]];
    for (Index u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  void pivot_loop() {
    while (bland_ ? find_entering_bland() : find_entering_block()) {
      if (++pivots_ > pivot_limit_)
        throw Error(ErrorCode::IterationLimit, "network simplex exceeded " +
                                                   std::to_string(pivot_limit_) + " pivots");
      find_join();
      find_leaving();
      change_flow();
      update_tree_structure();
      update_potential();
      if (delta_ > 0.0) {
        degenerate_run_ = 0;
        bland_ = false;
      } else if (++degenerate_run_ > degenerate_limit_) {
        bland_ = true;
      }
    }
  }

  Index n_, m_, root_, num_arcs_, art_arc_;
  const VectorXd& supply_;
  const VectorXd& demand_;
  const double* cost_;

  std::vector<Index> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<int> pred_dir_;
  std::vector<double> pred_flow_, pi_;
  std::vector<std::int8_t> state_;
  std::vector<Index> dirty_revs_;

  double eps_ = 0.0;
  Index block_size_ = 0, next_arc_ = 0;
  Index in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0;
  Index pivots_ = 0, pivot_limit_ = 0;
  Index degenerate_run_ = 0, degenerate_limit_ = 0;
  bool bland_ = false;
};

// Moves the float-sum drift between the two sides onto the largest entry of
// the lighter side.
void rebalance(VectorXd& supply, VectorXd& demand) {
  const double s = supply.sum(), d = demand.sum();
  const double diff = s - d;
  if (std::abs(diff) > 1e-12)
    throw Error(ErrorCode::Unbalanced, "supply " + std::to_string(s) + " vs demand " +
                                           std::to_string(d));
  if (diff == 0.0) return;
  VectorXd& lighter = diff > 0.0 ? demand : supply;
  Index k;
  lighter.maxCoeff(&k);
  lighter[k] += std::abs(diff);
}

}  // namespace

namespace {

template <typename CostAt>
TransportProblem gather_support(const VectorXd& mu, const VectorXd& nu, CostAt&& cost_at) {
  TransportProblem p;
  p.source_cells = mu.size();
  p.target_cells = nu.size();
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) p.source_index.push_back(i);
  for (Index j = 0; j < nu.size(); ++j)
    if (nu[j] > 0.0) p.target_index.push_back(j);
  const auto n = static_cast<Index>(p.source_index.size());
  const auto m = static_cast<Index>(p.target_index.size());
  p.supply.resize(n);
  p.demand.resize(m);
  p.cost.resize(n, m);
  for (Index a = 0; a < n; ++a) {
    p.supply[a] = mu[p.source_index[a]];
    for (Index b = 0; b < m; ++b) p.cost(a, b) = cost_at(p.source_index[a], p.target_index[b]);
  }
  for (Index b = 0; b < m; ++b) p.demand[b] = nu[p.target_index[b]];
  return p;
}

}  // namespace

TransportProblem make_transport_problem(const VectorXd& mu, const VectorXd& nu,
                                        const RowMatrixXd& full_cost) {
  if (full_cost.rows() != mu.size() || full_cost.cols() != nu.size())
    throw Error(ErrorCode::DimsMismatch, "cost matrix shape does not match the measures");
  return gather_support(mu, nu, [&](Index i, Index j) { return full_cost(i, j); });
}

TransportProblem make_transport_problem(const VectorXd& mu, const VectorXd& nu,
                                        const CostSpec& cost) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw Error(ErrorCode::DimsMismatch, "cost spec shape does not match the measures");
  return gather_support(mu, nu, cost);
}

TransportSolution solve_transport(const TransportProblem& problem) {
  const Index n = problem.supply.size(), m = problem.demand.size();
  if (n == 0 || m == 0) throw Error(ErrorCode::InvalidArgument, "empty support");
  if (problem.cost.rows() != n || problem.cost.cols() != m)
    throw Error(ErrorCode::DimsMismatch, "cost matrix shape does not match the supports");
  if ((problem.supply.array() < 0.0).any() || (problem.demand.array() < 0.0).any())
    throw Error(ErrorCode::NegativeMass, "negative supply or demand");

  VectorXd supply = problem.supply, demand = problem.demand;
  rebalance(supply, demand);

  NetworkSimplex ns(supply, demand, problem.cost);
  ns.run();

  TransportSolution sol;
  sol.pivots = ns.pivots();
  sol.value = ns.value();
  ns.potentials(sol.potentials.f, sol.potentials.g);
  const double shift = sol.potentials.f[0];
  sol.potentials.f.array() -= shift;
  sol.potentials.g.array() += shift;
  sol.dual_value = sol.potentials.f.dot(problem.supply) + sol.potentials.g.dot(problem.demand);

  double slack = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      slack = std::min(slack, problem.cost(i, j) - sol.potentials.f[i] - sol.potentials.g[j]);
  sol.potentials.feasibility_slack = slack;

  const auto src = [&](Index a) {
    return problem.source_index.empty() ? a : problem.source_index[a];
  };
  const auto dst = [&](Index b) {
    return problem.target_index.empty() ? b : problem.target_index[b];
  };
  sol.coupling.rows = problem.source_cells > 0 ? problem.source_cells : n;
  sol.coupling.cols = problem.target_cells > 0 ? problem.target_cells : m;
  for (const Triplet& t : ns.flows()) sol.coupling.triples.emplace_back(src(t.row()), dst(t.col()), t.value());
  std::sort(sol.coupling.triples.begin(), sol.coupling.triples.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
            });
  return sol;
}

TransportSolution solve_exact(const GridMeasure& mu, const GridMeasure& nu, double p) {
  if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "exact solve on different grids");
  return solve_transport(make_transport_problem(mu.mass, nu.mass, CostSpec(mu.grid, p)));
}

VectorXd SparseCoupling::row_marginal() const {
  VectorXd r = VectorXd::Zero(rows);
  for (const Triplet& t : triples) r[t.row()] += t.value();
  return r;
}

VectorXd SparseCoupling::col_marginal() const {
  VectorXd c = VectorXd::Zero(cols);
  for (const Triplet& t : triples) c[t.col()] += t.value();
  return c;
}

double SparseCoupling::total() const {
  double s = 0.0;
  for (const Triplet& t : triples) s += t.value();
  return s;
}

Eigen::SparseMatrix<double, Eigen::RowMajor, Index> SparseCoupling::to_sparse() const {
  Eigen::SparseMatrix<double, Eigen::RowMajor, Index> s(rows, cols);
  s.setFromTriplets(triples.begin(), triples.end());
  return s;
}

}  // namespace wbounds
