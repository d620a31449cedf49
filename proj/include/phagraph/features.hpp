#pragma once

#include <string>

#include "phagraph/common.hpp"
#include "phagraph/trainer.hpp"

namespace phagraph {

enum class Combiner { Concat, Average, Hadamard, WeightedL1, WeightedL2 };

Combiner parse_combiner(const std::string& name);
std::string combiner_name(Combiner c);

inline int combined_dim(Combiner c, int d) { return c == Combiner::Concat ? 2 * d : d; }

// Point-wise vertex-pair combiners; concat stacks the two vectors.
template <class A, class B>
RowVec combine_vectors(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, Combiner c) {
  if (a.size() != b.size())
    throw ComputeError("edge featurizer: vertex vectors have mismatched dimensions");
  RowVec out;
  switch (c) {
    case Combiner::Concat:
      out.resize(2 * a.size());
      out.head(a.size()) = a;
      out.tail(b.size()) = b;
      break;
    case Combiner::Average:
      out = (a + b) / 2.0;
      break;
    case Combiner::Hadamard:
      out = a.cwiseProduct(b);
      break;
    case Combiner::WeightedL1:
      out = (a - b).cwiseAbs();
      break;
    case Combiner::WeightedL2:
      out = (a - b).cwiseAbs2();
      break;
  }
  return out;
}

RowVec featurize_edge(const Embedding& phi, Index device, Index app, Combiner c);

}  // namespace phagraph
