#include "lqdim/fixtures.hpp"

namespace lqdim::fixtures {

namespace {

Map affine(double a, double b, double c, double d, double tx, double ty) {
  Matrix2<double> m;
  m << a, b, c, d;
  return Map(m, Vector2<double>(tx, ty));
}

}  // namespace

Ifs lebesgue_square() {
  return Ifs({affine(0.5, 0, 0, 0.5, 0, 0), affine(0.5, 0, 0, 0.5, 0.5, 0), affine(0.5, 0, 0, 0.5, 0, 0.5),
              affine(0.5, 0, 0, 0.5, 0.5, 0.5)});
}

Ifs cantor_corners() {
  const double r = 1.0 / 3.0;
  return Ifs({affine(r, 0, 0, r, 0, 0), affine(r, 0, 0, r, 2 * r, 2 * r)});
}

Ifs ratio_third() {
  const double r = 1.0 / 3.0;
  return Ifs({affine(r, 0, 0, r, 0, 0), affine(r, 0, 0, r, 2 * r, 0)});
}

Ifs diagonal_pair() { return Ifs({affine(0.5, 0, 0, 0.25, 0, 0), affine(0.5, 0, 0, 0.25, 0.5, 0)}); }

// Large translations keep the attractor many mesh cells wide at δ = 2⁻¹¹.
Ifs positive_pair() {
  return Ifs({affine(0.75 * 0.2, 0.75 * 0.02, 0.75 * 0.13, 0.75 * 0.1, 0, 0),
              affine(0.4 * 0.1, 0.4 * 0.13, 0.4 * 0.02, 0.4 * 0.2, 1024, 1024)});
}

std::vector<double> positive_pair_probabilities() { return {0.55, 0.45}; }

std::vector<std::string> names() {
  return {"lebesgue_square", "cantor_corners", "ratio_third", "diagonal_pair", "positive_pair"};
}

Ifs by_name(const std::string& name) {
  if (name == "lebesgue_square") return lebesgue_square();
  if (name == "cantor_corners") return cantor_corners();
  if (name == "ratio_third") return ratio_third();
  if (name == "diagonal_pair") return diagonal_pair();
  if (name == "positive_pair") return positive_pair();
  throw InputError("unknown fixture '" + name + "'");
}

}  // namespace lqdim::fixtures
