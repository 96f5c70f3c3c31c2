#include "kpinn/fastloss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kpinn/kernels.hpp"

namespace kpinn {

namespace {
constexpr int kPanel = 8192;  // multiple of the kernel sample block (64)
using std::size_t;
}  // namespace

FastLoss::FastLoss(const NetConfig& cfg, const ProblemSpec& spec, const QuadratureRule& quad,
                   const CollocationSet& colloc, const ICSet& ic, double lam_res,
                   double lam_ic, size_t memory_budget)
    : cfg_(cfg),
      spec_(spec),
      quad_(quad),
      lay_{cfg.depth, cfg.width},
      lam_res_(lam_res),
      lam_ic_(lam_ic),
      nr_(colloc.n_r),
      n0_(ic.n_0),
      nq_(quad.n_q),
      nm_(static_cast<size_t>(colloc.n_r) * quad.n_q),
      needs_z_(cfg.activation == Activation::kSin) {
  cfg_.validate();
  spec_.validate();
  if (colloc.points.empty()) throw std::invalid_argument("FastLoss: empty collocation set");
  if (ic.points.empty()) throw std::invalid_argument("FastLoss: empty IC set");
  if (quad_.n_q < 1) throw std::invalid_argument("FastLoss: empty quadrature rule");
  if (!(lam_res >= 0.0) || !(lam_ic >= 0.0))
    throw std::invalid_argument("FastLoss: loss weights must be >= 0");

  const int n = cfg_.width;
  const int depth = cfg_.depth;

  xc_.resize(static_cast<size_t>(nr_) * 2);
  for (int i = 0; i < nr_; ++i) {
    xc_[static_cast<size_t>(i) * 2] = colloc.points[static_cast<size_t>(i)].first;
    xc_[static_cast<size_t>(i) * 2 + 1] = colloc.points[static_cast<size_t>(i)].second;
  }
  xq_.resize(nm_ * 2);
  smat_.resize(static_cast<size_t>(nr_) * nq_);
  cmat_.resize(static_cast<size_t>(nr_) * nq_);
  for (int i = 0; i < nr_; ++i) {
    const double theta = colloc.points[static_cast<size_t>(i)].first;
    const double t = colloc.points[static_cast<size_t>(i)].second;
    for (int j = 0; j < nq_; ++j) {
      const size_t m = static_cast<size_t>(i) * nq_ + j;
      xq_[m * 2] = quad_.nodes[static_cast<size_t>(j)];
      xq_[m * 2 + 1] = t;
      smat_[m] = std::sin(theta - quad_.nodes[static_cast<size_t>(j)]);
      cmat_[m] = std::cos(theta - quad_.nodes[static_cast<size_t>(j)]);
    }
  }
  xic_.resize(static_cast<size_t>(n0_) * 2);
  u0_.resize(static_cast<size_t>(n0_));
  for (int k = 0; k < n0_; ++k) {
    xic_[static_cast<size_t>(k) * 2] = ic.points[static_cast<size_t>(k)];
    xic_[static_cast<size_t>(k) * 2 + 1] = 0.0;
    u0_[static_cast<size_t>(k)] = initial_condition(spec_, ic.points[static_cast<size_t>(k)]);
  }

  const size_t stack_bytes = nm_ * static_cast<size_t>(n) * depth * sizeof(double) *
                             (needs_z_ ? 2 : 1);
  panel_mode_ = stack_bytes > memory_budget;
  panel_ = static_cast<int>(std::min<size_t>(kPanel, nm_));

  auto alloc_stack = [&](std::vector<std::vector<double>>& st, size_t ns) {
    st.assign(static_cast<size_t>(depth), std::vector<double>(ns * n));
  };
  if (panel_mode_) {
    alloc_stack(ph_, static_cast<size_t>(panel_));
    if (needs_z_) alloc_stack(pz_, static_cast<size_t>(panel_));
  } else {
    alloc_stack(qh_, nm_);
    if (needs_z_) alloc_stack(qz_, nm_);
  }
  alloc_stack(ch_, static_cast<size_t>(nr_));
  alloc_stack(chth_, static_cast<size_t>(nr_));
  alloc_stack(cht_, static_cast<size_t>(nr_));
  if (needs_z_) {
    alloc_stack(cz_, static_cast<size_t>(nr_));
    alloc_stack(czth_, static_cast<size_t>(nr_));
    alloc_stack(czt_, static_cast<size_t>(nr_));
  }
  alloc_stack(ih_, static_cast<size_t>(n0_));
  if (needs_z_) alloc_stack(iz_, static_cast<size_t>(n0_));

  uq_.resize(nm_);
  vel_.resize(static_cast<size_t>(nr_));
  dvel_.resize(static_cast<size_t>(nr_));
  uc_.resize(static_cast<size_t>(nr_));
  ucth_.resize(static_cast<size_t>(nr_));
  uct_.resize(static_cast<size_t>(nr_));
  uic_.resize(static_cast<size_t>(n0_));
  rho_.resize(static_cast<size_t>(nr_));

  const size_t work = static_cast<size_t>(std::max({panel_, nr_, n0_})) * n;
  for (auto* buf : {&za_, &zb_, &zc_, &zd_, &ze_, &zf_}) buf->resize(work);

  wt_.resize(static_cast<size_t>(lay_.layer_count()));
  for (int l = 0; l < lay_.layer_count(); ++l)
    wt_[static_cast<size_t>(l)].resize(static_cast<size_t>(lay_.in_dim(l)) * lay_.out_dim(l));
}

void FastLoss::load_params(std::span<const double> params) {
  if (params.size() != lay_.size())
    throw std::invalid_argument("FastLoss: parameter vector size mismatch");
  params_ = params;
  for (int l = 0; l < lay_.layer_count(); ++l)
    kern::transpose(lay_.out_dim(l), lay_.in_dim(l), params.data() + lay_.weight_offset(l),
                    wt_[static_cast<size_t>(l)].data());
}

// value-stream forward for samples [s0,s1) of input x (sample-major pairs);
// hidden states land in h_stack (and z_stack for sin) at offset (s0-base)
void FastLoss::forward_quad(int s0, int s1, std::vector<std::vector<double>>& h_stack,
                            std::vector<std::vector<double>>& z_stack, int base) {
  const int ns = s1 - s0;
  const int n = cfg_.width;
  const size_t off = static_cast<size_t>(s0 - base) * n;
  const double* x = xq_.data() + static_cast<size_t>(s0) * 2;
  for (int l = 0; l < cfg_.depth; ++l) {
    double* z = needs_z_ ? z_stack[static_cast<size_t>(l)].data() + off : za_.data();
    const int in = lay_.in_dim(l);
    const double* src = l == 0 ? x : h_stack[static_cast<size_t>(l) - 1].data() + off;
    kern::affine_forward(ns, in, n, src, wt_[static_cast<size_t>(l)].data(),
                         params_.data() + lay_.bias_offset(l), z);
    kern::act_forward(cfg_.activation, ns * n, z, h_stack[static_cast<size_t>(l)].data() + off);
  }
  const int lout = cfg_.depth;
  kern::affine_forward(ns, n, 1, h_stack[static_cast<size_t>(lout) - 1].data() + off,
                       wt_[static_cast<size_t>(lout)].data(),
                       params_.data() + lay_.bias_offset(lout), uq_.data() + s0);
}

// reverse sweep matching forward_quad; gy holds the output adjoints and is
// built here from the residual seeds
void FastLoss::backward_quad(int s0, int s1, const std::vector<std::vector<double>>& h_stack,
                             const std::vector<std::vector<double>>& z_stack, int base,
                             std::span<double> grad) {
  const int ns = s1 - s0;
  const int n = cfg_.width;
  const size_t off = static_cast<size_t>(s0 - base) * n;
  const double scale = -spec_.K * quad_.dphi;
  double* gy = zf_.data();
#pragma omp parallel for schedule(static)
  for (int s = s0; s < s1; ++s) {
    const int i = s / nq_;
    gy[s - s0] = rho_[static_cast<size_t>(i)] * scale *
                 (ucth_[static_cast<size_t>(i)] * smat_[static_cast<size_t>(s)] +
                  uc_[static_cast<size_t>(i)] * cmat_[static_cast<size_t>(s)]);
  }

  const int lout = cfg_.depth;
  kern::affine_backward_params(ns, n, 1, gy, h_stack[static_cast<size_t>(lout) - 1].data() + off,
                               grad.data() + lay_.weight_offset(lout),
                               grad.data() + lay_.bias_offset(lout));
  double* g_post = za_.data();  // adjoint of the post-activation state
  double* g_pre = zb_.data();   // adjoint of the pre-activation state
  kern::affine_backward_input(ns, n, 1, gy, params_.data() + lay_.weight_offset(lout), g_post);
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    const double* zl = needs_z_ ? z_stack[static_cast<size_t>(l)].data() + off : nullptr;
    kern::act_backward(cfg_.activation, ns * n, h_stack[static_cast<size_t>(l)].data() + off,
                       zl, g_post, g_pre);
    const double* src = l == 0 ? xq_.data() + static_cast<size_t>(s0) * 2
                               : h_stack[static_cast<size_t>(l) - 1].data() + off;
    kern::affine_backward_params(ns, lay_.in_dim(l), n, g_pre, src,
                                 grad.data() + lay_.weight_offset(l),
                                 grad.data() + lay_.bias_offset(l));
    if (l > 0)
      kern::affine_backward_input(ns, lay_.in_dim(l), n, g_pre,
                                  params_.data() + lay_.weight_offset(l), g_post);
  }
}

void FastLoss::forward_colloc() {
  const int ns = nr_;
  const int n = cfg_.width;
  for (int l = 0; l < cfg_.depth; ++l) {
    double* z = needs_z_ ? cz_[static_cast<size_t>(l)].data() : za_.data();
    double* zth = needs_z_ ? czth_[static_cast<size_t>(l)].data() : zb_.data();
    double* zt = needs_z_ ? czt_[static_cast<size_t>(l)].data() : zc_.data();
    if (l == 0) {
      kern::affine_forward(ns, 2, n, xc_.data(), wt_[0].data(),
                           params_.data() + lay_.bias_offset(0), z);
      const double* w0 = params_.data() + lay_.weight_offset(0);
#pragma omp parallel for schedule(static)
      for (int s = 0; s < ns; ++s)
        for (int a = 0; a < n; ++a) {
          zth[static_cast<size_t>(s) * n + a] = w0[static_cast<size_t>(a) * 2];
          zt[static_cast<size_t>(s) * n + a] = w0[static_cast<size_t>(a) * 2 + 1];
        }
    } else {
      kern::affine_forward(ns, n, n, ch_[static_cast<size_t>(l) - 1].data(),
                           wt_[static_cast<size_t>(l)].data(),
                           params_.data() + lay_.bias_offset(l), z);
      kern::affine_forward(ns, n, n, chth_[static_cast<size_t>(l) - 1].data(),
                           wt_[static_cast<size_t>(l)].data(), nullptr, zth);
      kern::affine_forward(ns, n, n, cht_[static_cast<size_t>(l) - 1].data(),
                           wt_[static_cast<size_t>(l)].data(), nullptr, zt);
    }
    kern::dual_act_forward(cfg_.activation, ns * n, z, zth, zt,
                           ch_[static_cast<size_t>(l)].data(),
                           chth_[static_cast<size_t>(l)].data(),
                           cht_[static_cast<size_t>(l)].data());
  }
  const int lout = cfg_.depth;
  kern::affine_forward(ns, n, 1, ch_[static_cast<size_t>(lout) - 1].data(),
                       wt_[static_cast<size_t>(lout)].data(),
                       params_.data() + lay_.bias_offset(lout), uc_.data());
  kern::affine_forward(ns, n, 1, chth_[static_cast<size_t>(lout) - 1].data(),
                       wt_[static_cast<size_t>(lout)].data(), nullptr, ucth_.data());
  kern::affine_forward(ns, n, 1, cht_[static_cast<size_t>(lout) - 1].data(),
                       wt_[static_cast<size_t>(lout)].data(), nullptr, uct_.data());
}

void FastLoss::forward_ic() {
  const int ns = n0_;
  const int n = cfg_.width;
  for (int l = 0; l < cfg_.depth; ++l) {
    double* z = needs_z_ ? iz_[static_cast<size_t>(l)].data() : za_.data();
    const double* src = l == 0 ? xic_.data() : ih_[static_cast<size_t>(l) - 1].data();
    kern::affine_forward(ns, lay_.in_dim(l), n, src, wt_[static_cast<size_t>(l)].data(),
                         params_.data() + lay_.bias_offset(l), z);
    kern::act_forward(cfg_.activation, ns * n, z, ih_[static_cast<size_t>(l)].data());
  }
  const int lout = cfg_.depth;
  kern::affine_forward(ns, n, 1, ih_[static_cast<size_t>(lout) - 1].data(),
                       wt_[static_cast<size_t>(lout)].data(),
                       params_.data() + lay_.bias_offset(lout), uic_.data());
}

FastLoss::Losses FastLoss::compute_losses() {
  const double scale = -spec_.K * quad_.dphi;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr_; ++i) {
    const double* srow = smat_.data() + static_cast<size_t>(i) * nq_;
    const double* crow = cmat_.data() + static_cast<size_t>(i) * nq_;
    const double* urow = uq_.data() + static_cast<size_t>(i) * nq_;
    vel_[static_cast<size_t>(i)] = scale * kern::dot(nq_, srow, urow);
    dvel_[static_cast<size_t>(i)] = scale * kern::dot(nq_, crow, urow);
  }
  double lres = 0.0;
  for (int i = 0; i < nr_; ++i) {
    const double r = uct_[static_cast<size_t>(i)] +
                     dvel_[static_cast<size_t>(i)] * uc_[static_cast<size_t>(i)] +
                     vel_[static_cast<size_t>(i)] * ucth_[static_cast<size_t>(i)];
    rho_[static_cast<size_t>(i)] = r;
    lres += r * r;
  }
  lres /= static_cast<double>(nr_);
  double lic = 0.0;
  for (int k = 0; k < n0_; ++k) {
    const double d = uic_[static_cast<size_t>(k)] - u0_[static_cast<size_t>(k)];
    lic += d * d;
  }
  lic /= static_cast<double>(n0_);
  Losses out;
  out.l_res = lres;
  out.l_ic = lic;
  out.l_total = loss_total(lam_res_, lam_ic_, lres, lic);
  if (!std::isfinite(out.l_total)) throw NonFiniteError("non-finite training loss");
  return out;
}

FastLoss::Losses FastLoss::loss_only(std::span<const double> params) {
  load_params(params);
  auto& h_stack = panel_mode_ ? ph_ : qh_;
  auto& z_stack = panel_mode_ ? pz_ : qz_;
  for (int s0 = 0; s0 < static_cast<int>(nm_); s0 += panel_)
    forward_quad(s0, std::min<int>(static_cast<int>(nm_), s0 + panel_), h_stack, z_stack,
                 panel_mode_ ? s0 : 0);
  forward_colloc();
  forward_ic();
  return compute_losses();
}

FastLoss::Losses FastLoss::loss_and_grad(std::span<const double> params,
                                         std::span<double> grad) {
  if (grad.size() != lay_.size())
    throw std::invalid_argument("FastLoss: gradient vector size mismatch");
  const Losses out = loss_only(params);
  std::fill(grad.begin(), grad.end(), 0.0);

  // residual seeds rho_i = lam_res * 2 r_i / N_r
  const double rscale = lam_res_ * 2.0 / static_cast<double>(nr_);
  for (int i = 0; i < nr_; ++i) rho_[static_cast<size_t>(i)] *= rscale;

  // --- collocation stream ---
  const int n = cfg_.width;
  const int lout = cfg_.depth;
  double* gu = zd_.data();
  double* gth = ze_.data();
  double* gt = zf_.data();
  for (int i = 0; i < nr_; ++i) {
    gu[i] = rho_[static_cast<size_t>(i)] * dvel_[static_cast<size_t>(i)];
    gth[i] = rho_[static_cast<size_t>(i)] * vel_[static_cast<size_t>(i)];
    gt[i] = rho_[static_cast<size_t>(i)];
  }
  kern::affine_backward_params(nr_, n, 1, gu, ch_[static_cast<size_t>(lout) - 1].data(),
                               grad.data() + lay_.weight_offset(lout),
                               grad.data() + lay_.bias_offset(lout));
  kern::affine_backward_params(nr_, n, 1, gth, chth_[static_cast<size_t>(lout) - 1].data(),
                               grad.data() + lay_.weight_offset(lout), nullptr);
  kern::affine_backward_params(nr_, n, 1, gt, cht_[static_cast<size_t>(lout) - 1].data(),
                               grad.data() + lay_.weight_offset(lout), nullptr);
  double* du = za_.data();
  double* dth = zb_.data();
  double* dt = zc_.data();
  const double* wl = params_.data() + lay_.weight_offset(lout);
  kern::affine_backward_input(nr_, n, 1, gu, wl, du);
  kern::affine_backward_input(nr_, n, 1, gth, wl, dth);
  kern::affine_backward_input(nr_, n, 1, gt, wl, dt);
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    const double* zl = needs_z_ ? cz_[static_cast<size_t>(l)].data() : nullptr;
    const double* zthl = needs_z_ ? czth_[static_cast<size_t>(l)].data() : nullptr;
    const double* ztl = needs_z_ ? czt_[static_cast<size_t>(l)].data() : nullptr;
    kern::dual_act_backward(cfg_.activation, nr_ * n, ch_[static_cast<size_t>(l)].data(),
                            chth_[static_cast<size_t>(l)].data(),
                            cht_[static_cast<size_t>(l)].data(), zl, zthl, ztl, du, dth, dt,
                            zd_.data(), ze_.data(), zf_.data());
    double* au = zd_.data();
    double* ath = ze_.data();
    double* at = zf_.data();
    if (l > 0) {
      kern::affine_backward_params(nr_, n, n, au, ch_[static_cast<size_t>(l) - 1].data(),
                                   grad.data() + lay_.weight_offset(l),
                                   grad.data() + lay_.bias_offset(l));
      kern::affine_backward_params(nr_, n, n, ath, chth_[static_cast<size_t>(l) - 1].data(),
                                   grad.data() + lay_.weight_offset(l), nullptr);
      kern::affine_backward_params(nr_, n, n, at, cht_[static_cast<size_t>(l) - 1].data(),
                                   grad.data() + lay_.weight_offset(l), nullptr);
      const double* wcur = params_.data() + lay_.weight_offset(l);
      kern::affine_backward_input(nr_, n, n, au, wcur, du);
      kern::affine_backward_input(nr_, n, n, ath, wcur, dth);
      kern::affine_backward_input(nr_, n, n, at, wcur, dt);
    } else {
      kern::affine_backward_params(nr_, 2, n, au, xc_.data(),
                                   grad.data() + lay_.weight_offset(0),
                                   grad.data() + lay_.bias_offset(0));
      // tangent seeds (1,0) and (0,1) reduce to column sums of the adjoints
      double* gw0 = grad.data() + lay_.weight_offset(0);
#pragma omp parallel for schedule(static)
      for (int a = 0; a < n; ++a) {
        double sth = 0.0, st = 0.0;
        for (int s = 0; s < nr_; ++s) {
          sth += ath[static_cast<size_t>(s) * n + a];
          st += at[static_cast<size_t>(s) * n + a];
        }
        gw0[static_cast<size_t>(a) * 2] += sth;
        gw0[static_cast<size_t>(a) * 2 + 1] += st;
      }
    }
  }

  // --- quadrature stream ---
  if (panel_mode_) {
    for (int s0 = 0; s0 < static_cast<int>(nm_); s0 += panel_) {
      const int s1 = std::min<int>(static_cast<int>(nm_), s0 + panel_);
      forward_quad(s0, s1, ph_, pz_, s0);
      backward_quad(s0, s1, ph_, pz_, s0, grad);
    }
  } else {
    for (int s0 = 0; s0 < static_cast<int>(nm_); s0 += panel_)
      backward_quad(s0, std::min<int>(static_cast<int>(nm_), s0 + panel_), qh_, qz_, 0, grad);
  }

  // --- IC stream ---
  double* gic = zf_.data();
  const double iscale = lam_ic_ * 2.0 / static_cast<double>(n0_);
  for (int k = 0; k < n0_; ++k)
    gic[k] = iscale * (uic_[static_cast<size_t>(k)] - u0_[static_cast<size_t>(k)]);
  kern::affine_backward_params(n0_, n, 1, gic, ih_[static_cast<size_t>(lout) - 1].data(),
                               grad.data() + lay_.weight_offset(lout),
                               grad.data() + lay_.bias_offset(lout));
  double* g_post = za_.data();
  double* g_pre = zb_.data();
  kern::affine_backward_input(n0_, n, 1, gic, wl, g_post);
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    const double* zl = needs_z_ ? iz_[static_cast<size_t>(l)].data() : nullptr;
    kern::act_backward(cfg_.activation, n0_ * n, ih_[static_cast<size_t>(l)].data(), zl,
                       g_post, g_pre);
    const double* src = l == 0 ? xic_.data() : ih_[static_cast<size_t>(l) - 1].data();
    kern::affine_backward_params(n0_, lay_.in_dim(l), n, g_pre, src,
                                 grad.data() + lay_.weight_offset(l),
                                 grad.data() + lay_.bias_offset(l));
    if (l > 0)
      kern::affine_backward_input(n0_, lay_.in_dim(l), n, g_pre,
                                  params_.data() + lay_.weight_offset(l), g_post);
  }

  for (double g : grad)
    if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient");
  return out;
}

}  // namespace kpinn
