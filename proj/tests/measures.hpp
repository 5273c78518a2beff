#pragma once

#include "rangewalk/groups.hpp"

namespace rangewalk::testing {

inline StepDistribution z_walk(double up) {
  return StepDistribution(GroupDescriptor::integer_line(),
                          {{GroupElement::integer(1), up}, {GroupElement::integer(-1), 1 - up}});
}

inline StepDistribution directed_z2() {
  return StepDistribution(GroupDescriptor::lattice(2),
                          {{GroupElement::lattice({1, 0}), 0.5}, {GroupElement::lattice({0, 1}), 0.5}});
}

inline StepDistribution f2_uniform() {
  return StepDistribution(GroupDescriptor::free_group(2),
                          {{GroupElement::word({1}), 0.25}, {GroupElement::word({-1}), 0.25},
                           {GroupElement::word({2}), 0.25}, {GroupElement::word({-2}), 0.25}});
}

inline StepDistribution f2_asymmetric() {
  return StepDistribution(GroupDescriptor::free_group(2),
                          {{GroupElement::word({1}), 0.4}, {GroupElement::word({-1}), 0.1},
                           {GroupElement::word({2}), 0.3}, {GroupElement::word({-2}), 0.2}});
}

inline StepDistribution z_long_jumps() {
  return StepDistribution(GroupDescriptor::integer_line(), {{GroupElement::integer(-1), 0.5},
                                                            {GroupElement::integer(2), 0.3},
                                                            {GroupElement::integer(0), 0.2}});
}

inline StepDistribution cyclic5() {
  return StepDistribution(GroupDescriptor::cyclic_product({5}),
                          {{GroupElement::residues({1}), 0.6}, {GroupElement::residues({3}), 0.4}});
}

}  // namespace rangewalk::testing
