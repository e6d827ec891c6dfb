#ifndef LQDIM_FIXTURES_HPP
#define LQDIM_FIXTURES_HPP

#include <string>
#include <vector>

#include "lqdim/ifs.hpp"

namespace lqdim::fixtures {

/// Four maps diag(1/2) at the corners of the unit square.
Ifs lebesgue_square();
/// diag(1/3) at (0,0) and (2/3,2/3).
Ifs cantor_corners();
/// Two similarities of ratio 1/3 at 0 and 2/3 on the x-axis.
Ifs ratio_third();
/// diag(1/2, 1/4) at (0,0) and (1/2, 0).
Ifs diagonal_pair();
/// Strictly positive, projectively separated, 1-bunched pair with d ≈ 0.335.
Ifs positive_pair();
/// Bernoulli vector passing metric bunching at q = 2 on positive_pair().
std::vector<double> positive_pair_probabilities();

std::vector<std::string> names();
/// Throws InputError for unknown names.
Ifs by_name(const std::string& name);

}  // namespace lqdim::fixtures

#endif  // LQDIM_FIXTURES_HPP
