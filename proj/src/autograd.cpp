#include "isomt/autograd.hpp"

#include <cmath>

namespace isomt::nn {

Param* ParamStore::add(const std::string& name, Mat init) {
  require(by_name_.find(name) == by_name_.end(), "ParamStore: duplicate parameter \"", name,
          "\"");
  items_.push_back(std::make_unique<Param>(name, std::move(init)));
  Param* p = items_.back().get();
  by_name_.emplace(name, p);
  return p;
}

Param* ParamStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

Param* ParamStore::at(const std::string& name) const {
  Param* p = find(name);
  require(p != nullptr, "ParamStore: no parameter \"", name, "\"");
  return p;
}

void ParamStore::zero_grads() {
  for (auto& p : items_) p->grad.setZero();
}

int Tape::push(Mat value, bool needs, std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.needs = needs;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::accum(int id, const Mat& g) {
  Node& n = node(id);
  if (!n.needs) return;
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  n.grad += g;
}

const Mat& Tape::grad(int id) const {
  const Node& n = node(id);
  require(n.grad.size() != 0, "Tape: gradient not populated; run backward() first");
  return n.grad;
}

int Tape::constant(Mat value) { return push(std::move(value), false); }

int Tape::leaf(Param* p) {
  auto it = leaf_index_.find(p);
  if (it != leaf_index_.end()) return it->second;
  int id = push(p->value, true);
  node(id).param = p;
  leaf_index_.emplace(p, id);
  leaf_ids_.push_back(id);
  return id;
}

int Tape::add(int a, int b) {
  require(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
          "Tape::add: shape mismatch");
  bool ng = needs(a) || needs(b);
  int id = push(val(a) + val(b), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, b] {
      accum(a, node(id).grad);
      accum(b, node(id).grad);
    };
  return id;
}

int Tape::add_rowvec(int a, int row) {
  require(val(row).rows() == 1 && val(row).cols() == val(a).cols(),
          "Tape::add_rowvec: row must be 1 x cols(a)");
  bool ng = needs(a) || needs(row);
  Mat out = val(a);
  out.rowwise() += val(row).row(0);
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, row] {
      accum(a, node(id).grad);
      accum(row, node(id).grad.colwise().sum());
    };
  return id;
}

int Tape::scale(int a, double c) {
  bool ng = needs(a);
  int id = push(val(a) * c, ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, c] { accum(a, node(id).grad * c); };
  return id;
}

int Tape::cmul(int a, int b) {
  require(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
          "Tape::cmul: shape mismatch");
  bool ng = needs(a) || needs(b);
  int id = push(val(a).cwiseProduct(val(b)), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, b] {
      accum(a, node(id).grad.cwiseProduct(val(b)));
      accum(b, node(id).grad.cwiseProduct(val(a)));
    };
  return id;
}

int Tape::matmul(int a, int b) {
  require(val(a).cols() == val(b).rows(), "Tape::matmul: inner dims differ");
  bool ng = needs(a) || needs(b);
  int id = push(val(a) * val(b), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, b] {
      accum(a, node(id).grad * val(b).transpose());
      accum(b, val(a).transpose() * node(id).grad);
    };
  return id;
}

int Tape::matmul_nt(int a, int b) {
  require(val(a).cols() == val(b).cols(), "Tape::matmul_nt: inner dims differ");
  bool ng = needs(a) || needs(b);
  int id = push(val(a) * val(b).transpose(), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, b] {
      accum(a, node(id).grad * val(b));
      accum(b, node(id).grad.transpose() * val(a));
    };
  return id;
}

int Tape::relu(int a) {
  bool ng = needs(a);
  int id = push(val(a).cwiseMax(0.0), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a] {
      Mat m = (val(a).array() > 0.0).cast<double>();
      accum(a, node(id).grad.cwiseProduct(m));
    };
  return id;
}

int Tape::softmax_rows(int a, const Mat* additive_mask) {
  Mat z = val(a);
  if (additive_mask != nullptr) {
    require(additive_mask->rows() == z.rows() && additive_mask->cols() == z.cols(),
            "Tape::softmax_rows: mask shape mismatch");
    z += *additive_mask;
  }
  Mat y(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
    y.row(r) = e / e.sum();
  }
  bool ng = needs(a);
  int id = push(std::move(y), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a] {
      const Mat& yv = node(id).value;
      const Mat& g = node(id).grad;
      Mat da(yv.rows(), yv.cols());
      for (Eigen::Index r = 0; r < yv.rows(); ++r) {
        double dot = g.row(r).dot(yv.row(r));
        da.row(r) = (yv.row(r).array() * (g.row(r).array() - dot)).matrix();
      }
      accum(a, da);
    };
  return id;
}

int Tape::layer_norm(int x, int gain, int bias, double eps) {
  const Mat& xv = val(x);
  Eigen::Index cols = xv.cols();
  require(val(gain).rows() == 1 && val(gain).cols() == cols, "Tape::layer_norm: bad gain");
  require(val(bias).rows() == 1 && val(bias).cols() == cols, "Tape::layer_norm: bad bias");
  Mat xhat(xv.rows(), cols);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mu = xv.row(r).mean();
    double var = (xv.row(r).array() - mu).square().mean();
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std(r) = inv;
    xhat.row(r) = (xv.row(r).array() - mu) * inv;
  }
  Mat out = (xhat.array().rowwise() * val(gain).row(0).array()).matrix();
  out.rowwise() += val(bias).row(0);
  bool ng = needs(x) || needs(gain) || needs(bias);
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, x, gain, bias, xhat, inv_std] {
      const Mat& g = node(id).grad;
      accum(gain, (g.cwiseProduct(xhat)).colwise().sum());
      accum(bias, g.colwise().sum());
      if (!needs(x)) return;
      Mat dxhat = (g.array().rowwise() * val(gain).row(0).array()).matrix();
      Mat dx(dxhat.rows(), dxhat.cols());
      for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
        double mean_d = dxhat.row(r).mean();
        double mean_dx = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = (inv_std(r) *
                     (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx))
                        .matrix();
      }
      accum(x, dx);
    };
  return id;
}

int Tape::gather_rows(int table, const std::vector<int>& ids) {
  const Mat& t = val(table);
  Mat out(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < t.rows(), "Tape::gather_rows: id ", ids[i],
            " out of range [0, ", t.rows(), ")");
    out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  bool ng = needs(table);
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, table, ids] {
      Node& tn = node(table);
      if (tn.grad.size() == 0) tn.grad = Mat::Zero(tn.value.rows(), tn.value.cols());
      const Mat& g = node(id).grad;
      for (size_t i = 0; i < ids.size(); ++i)
        tn.grad.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    };
  return id;
}

int Tape::slice_cols(int a, int col0, int ncols) {
  require(col0 >= 0 && ncols > 0 && col0 + ncols <= val(a).cols(),
          "Tape::slice_cols: bad range");
  bool ng = needs(a);
  int id = push(val(a).middleCols(col0, ncols), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, col0, ncols] {
      Node& an = node(a);
      if (an.grad.size() == 0) an.grad = Mat::Zero(an.value.rows(), an.value.cols());
      an.grad.middleCols(col0, ncols) += node(id).grad;
    };
  return id;
}

int Tape::concat_cols(const std::vector<int>& parts) {
  require(!parts.empty(), "Tape::concat_cols: no parts");
  Eigen::Index rows = val(parts[0]).rows();
  Eigen::Index total = 0;
  bool ng = false;
  for (int p : parts) {
    require(val(p).rows() == rows, "Tape::concat_cols: row mismatch");
    total += val(p).cols();
    ng = ng || needs(p);
  }
  Mat out(rows, total);
  Eigen::Index off = 0;
  for (int p : parts) {
    out.middleCols(off, val(p).cols()) = val(p);
    off += val(p).cols();
  }
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, parts] {
      Eigen::Index off2 = 0;
      for (int p : parts) {
        Eigen::Index w = val(p).cols();
        accum(p, node(id).grad.middleCols(off2, w));
        off2 += w;
      }
    };
  return id;
}

int Tape::shift_rows(int a, int offset) {
  const Mat& v = val(a);
  Mat out = Mat::Zero(v.rows(), v.cols());
  for (Eigen::Index t = 0; t < v.rows(); ++t) {
    Eigen::Index s = t - offset;
    if (s >= 0 && s < v.rows()) out.row(t) = v.row(s);
  }
  bool ng = needs(a);
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, a, offset] {
      const Mat& g = node(id).grad;
      Mat da = Mat::Zero(g.rows(), g.cols());
      for (Eigen::Index t = 0; t < g.rows(); ++t) {
        Eigen::Index s = t - offset;
        if (s >= 0 && s < g.rows()) da.row(s) += g.row(t);
      }
      accum(a, da);
    };
  return id;
}

int Tape::ce_label_smooth_sum(int logits, const std::vector<int>& targets,
                              double smoothing) {
  const Mat& z = val(logits);
  require(static_cast<size_t>(z.rows()) == targets.size(),
          "Tape::ce_label_smooth_sum: one target per row required");
  require(smoothing >= 0.0 && smoothing < 1.0, "Tape::ce_label_smooth_sum: bad smoothing");
  Eigen::Index v = z.cols();
  Mat p(z.rows(), v);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    int t = targets[static_cast<size_t>(r)];
    require(t >= 0 && t < v, "Tape::ce_label_smooth_sum: target ", t, " out of range");
    double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
    double sum = e.sum();
    p.row(r) = e / sum;
    double lse = m + std::log(sum);
    // q = smoothing/V + (1 - smoothing) * one_hot(t)
    double qdotz = smoothing / v * z.row(r).sum() + (1.0 - smoothing) * z(r, t);
    loss += lse - qdotz;
  }
  bool ng = needs(logits);
  Mat out(1, 1);
  out(0, 0) = loss;
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, logits, targets, smoothing, p] {
      double g = node(id).grad(0, 0);
      Mat dz = p;
      Eigen::Index v2 = dz.cols();
      for (Eigen::Index r = 0; r < dz.rows(); ++r) {
        dz.row(r).array() -= smoothing / v2;
        dz(r, targets[static_cast<size_t>(r)]) -= 1.0 - smoothing;
      }
      accum(logits, g * dz);
    };
  return id;
}

int Tape::mse_sum(int pred, const Mat& target, const Mat& mask) {
  const Mat& p = val(pred);
  require(p.rows() == target.rows() && p.cols() == target.cols(),
          "Tape::mse_sum: target shape mismatch");
  require(p.rows() == mask.rows() && p.cols() == mask.cols(),
          "Tape::mse_sum: mask shape mismatch");
  Mat diff = p - target;
  Mat out(1, 1);
  out(0, 0) = diff.cwiseProduct(diff).cwiseProduct(mask).sum();
  bool ng = needs(pred);
  int id = push(std::move(out), ng, nullptr);
  if (ng)
    node(id).back = [this, id, pred, diff, mask] {
      accum(pred, 2.0 * node(id).grad(0, 0) * diff.cwiseProduct(mask));
    };
  return id;
}

void Tape::backward(int loss) {
  require(val(loss).rows() == 1 && val(loss).cols() == 1, "Tape::backward: loss must be 1x1");
  require(node(loss).needs, "Tape::backward: loss does not depend on any parameter");
  node(loss).grad = Mat::Ones(1, 1);
  for (int i = loss; i >= 0; --i) {
    Node& n = node(i);
    if (n.back && n.grad.size() != 0) n.back();
  }
}

void Tape::add_param_grads_to(double scale) {
  for (int id : leaf_ids_) {
    Node& n = node(id);
    if (n.grad.size() != 0) n.param->grad += scale * n.grad;
  }
}

}  // namespace isomt::nn
