#include "spancb/actions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "spancb/errors.hpp"
#include "spancb/linalg.hpp"

namespace spancb {
namespace {

constexpr double kNormSlack = 1e-9;
constexpr double kSpanDetFloor = 1e-12;

// Greedy column selection: the same determinant-functional sweep the
// spanner initialization performs, used here only to certify that the
// columns span R^d.
void verify_span(const Eigen::MatrixXd& embeddings) {
  const int d = static_cast<int>(embeddings.rows());
  DesignMatrixState state = DesignMatrixState::identity(d);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd theta = state.det_functional(i);
    const Eigen::VectorXd scores = embeddings.transpose() * theta;
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (std::abs(scores[j]) > best_abs) {
        best_abs = std::abs(scores[j]);
        best = j;
      }
    }
    if (best_abs <= kSpanDetFloor) {
      throw RankDeficiencyError(
          "action embeddings do not span R^" + std::to_string(d) +
          " (initialization determinant fell below 1e-12 at column " +
          std::to_string(i + 1) + ")");
    }
    state.rank_one_replace(i, embeddings.col(best));
  }
}

}  // namespace

std::vector<ActionId> ActionSet::argmax_batch(
    const Context& x, const Eigen::MatrixXd& thetas) const {
  std::vector<ActionId> out;
  out.reserve(static_cast<std::size_t>(thetas.cols()));
  for (Eigen::Index j = 0; j < thetas.cols(); ++j) {
    out.push_back(argmax(x, thetas.col(j)));
  }
  return out;
}

FiniteActionSet::FiniteActionSet(std::vector<ActionId> ids,
                                 Eigen::MatrixXd embeddings)
    : ids_(std::move(ids)), embeddings_(std::move(embeddings)) {
  if (ids_.size() != static_cast<std::size_t>(embeddings_.cols())) {
    throw ConfigError("FiniteActionSet: " + std::to_string(ids_.size()) +
                      " ids for " + std::to_string(embeddings_.cols()) +
                      " embedding columns");
  }
  if (embeddings_.rows() == 0 || embeddings_.cols() == 0) {
    throw ConfigError("FiniteActionSet: empty embedding matrix");
  }
  // Sort columns by id so the lowest-id tie rule is one forward scan.
  std::vector<Eigen::Index> order(ids_.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ids_[static_cast<std::size_t>(a)] <
           ids_[static_cast<std::size_t>(b)];
  });
  Eigen::MatrixXd sorted(embeddings_.rows(), embeddings_.cols());
  std::vector<ActionId> sorted_ids(ids_.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted.col(static_cast<Eigen::Index>(k)) = embeddings_.col(order[k]);
    sorted_ids[k] = ids_[static_cast<std::size_t>(order[k])];
  }
  for (std::size_t k = 1; k < sorted_ids.size(); ++k) {
    if (sorted_ids[k] == sorted_ids[k - 1]) {
      throw ConfigError("FiniteActionSet: duplicate action id " +
                        std::to_string(sorted_ids[k]));
    }
  }
  ids_ = std::move(sorted_ids);
  embeddings_ = std::move(sorted);

  for (Eigen::Index j = 0; j < embeddings_.cols(); ++j) {
    const double norm = embeddings_.col(j).norm();
    if (norm > 1.0 + kNormSlack) {
      throw InvariantError(
          "action " + std::to_string(ids_[static_cast<std::size_t>(j)]) +
          " has embedding norm " + std::to_string(norm) + " > 1");
    }
  }
  if (embeddings_.cols() < embeddings_.rows()) {
    throw RankDeficiencyError(
        "only " + std::to_string(embeddings_.cols()) + " actions in R^" +
        std::to_string(embeddings_.rows()) + "; cannot span the space");
  }
  verify_span(embeddings_);
}

Eigen::Index FiniteActionSet::index_of(ActionId a) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), a);
  if (it == ids_.end() || *it != a) {
    throw ConfigError("unknown action id " + std::to_string(a));
  }
  return static_cast<Eigen::Index>(it - ids_.begin());
}

Eigen::VectorXd FiniteActionSet::embed(const Context&, ActionId a) const {
  return embeddings_.col(index_of(a));
}

Eigen::VectorXd FiniteActionSet::scores(const Eigen::VectorXd& theta) const {
  if (theta.size() != embeddings_.rows()) {
    throw ConfigError("scores: vector size " + std::to_string(theta.size()) +
                      " does not match dimension " +
                      std::to_string(embeddings_.rows()));
  }
  return embeddings_.transpose() * theta;
}

ActionId FiniteActionSet::argmax(const Context&,
                                 const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd s = scores(theta);
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < s.size(); ++j) {
    if (s[j] > s[best]) best = j;  // strict: ties keep the lowest id
  }
  return ids_[static_cast<std::size_t>(best)];
}

std::vector<ActionId> FiniteActionSet::argmax_batch(
    const Context&, const Eigen::MatrixXd& thetas) const {
  if (thetas.rows() != embeddings_.rows()) {
    throw ConfigError("argmax_batch: dimension mismatch");
  }
  const Eigen::MatrixXd s = embeddings_.transpose() * thetas;
  std::vector<ActionId> out;
  out.reserve(static_cast<std::size_t>(s.cols()));
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < s.rows(); ++j) {
      if (s(j, c) > s(best, c)) best = j;
    }
    out.push_back(ids_[static_cast<std::size_t>(best)]);
  }
  return out;
}

FiniteActionSet FiniteActionSet::with_duplicates(ActionId source,
                                                 int copies) const {
  if (copies < 0) throw ConfigError("with_duplicates: negative copy count");
  const Eigen::VectorXd col = embeddings_.col(index_of(source));
  const ActionId base = ids_.back() + 1;
  std::vector<ActionId> ids = ids_;
  Eigen::MatrixXd emb(embeddings_.rows(),
                      embeddings_.cols() + static_cast<Eigen::Index>(copies));
  emb.leftCols(embeddings_.cols()) = embeddings_;
  for (int k = 0; k < copies; ++k) {
    ids.push_back(base + k);
    emb.col(embeddings_.cols() + k) = col;
  }
  return FiniteActionSet(std::move(ids), std::move(emb));
}

FiniteActionSet load_embeddings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embeddings file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(path + ": empty embeddings file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "action_id") {
    throw ConfigError(path + ": header must be action_id,dim_0,...,dim_{d-1}");
  }
  const int d = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j) + 1] !=
        "dim_" + std::to_string(j)) {
      throw ConfigError(path + ": unexpected header column '" +
                        header[static_cast<std::size_t>(j) + 1] +
                        "', expected dim_" + std::to_string(j));
    }
  }

  std::vector<ActionId> ids;
  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    ActionId id = 0;
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(d));
    while (std::getline(ss, cell, ',')) {
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (col == 0) {
        const auto res = std::from_chars(first, last, id);
        if (res.ec != std::errc() || res.ptr != last) {
          throw ConfigError(path + ": row " + std::to_string(row) +
                            ": bad action id '" + cell + "'");
        }
      } else {
        double v = 0.0;
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last) {
          throw ConfigError(path + ": row " + std::to_string(row) +
                            ": bad float '" + cell + "'");
        }
        coords.push_back(v);
      }
      ++col;
    }
    if (col != d + 1) {
      throw ConfigError(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(col) + " fields, expected " +
                        std::to_string(d + 1));
    }
    double sq = 0.0;
    for (double v : coords) sq += v * v;
    if (std::sqrt(sq) > 1.0 + kNormSlack) {
      throw InvariantError(path + ": row " + std::to_string(row) +
                           " rejected: embedding norm " +
                           std::to_string(std::sqrt(sq)) + " exceeds 1");
    }
    ids.push_back(id);
    values.insert(values.end(), coords.begin(), coords.end());
  }
  if (ids.empty()) throw ConfigError(path + ": no action rows");
  Eigen::MatrixXd emb(d, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    for (int i = 0; i < d; ++i) {
      emb(i, static_cast<Eigen::Index>(j)) =
          values[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
    }
  }
  return FiniteActionSet(std::move(ids), std::move(emb));
}

}  // namespace spancb
