#pragma once

#include <gtest/gtest.h>

#include "irsce/channel.hpp"
#include "irsce/numerics.hpp"

namespace irsce::testing {

inline double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline SystemGeometry small_geometry(Index n_bs, Index n_ue, Index m_y, Index m_z) {
  SystemGeometry g;
  g.n_bs = n_bs;
  g.n_ue = n_ue;
  g.m_y = m_y;
  g.m_z = m_z;
  return g.with_unitary_dictionaries();
}

inline SamplingOptions normalized(bool on_grid = false) {
  SamplingOptions o;
  o.on_grid = on_grid;
  o.normalized_gains = true;
  return o;
}

}  // namespace irsce::testing
