#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lhom/errors.hpp"
#include "lhom/kernels.hpp"

using namespace lhom::kernels;

namespace {

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (const KernelTable* t = table_for(b)) out.push_back(t);
  return out;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(table_for(Backend::Scalar) == &scalar_table());
  CHECK(std::string(scalar_table().name) == "scalar");
  CHECK(backend_name(Backend::Avx2) == "avx2");
}

TEST_CASE("scalar kernels on hand-computed inputs") {
  const KernelTable& s = scalar_table();
  double row[3] = {1.0, 2.0, 3.0};
  const double c[3] = {1.0, 0.0, -1.0};
  const double sn[3] = {0.0, 1.0, 2.0};
  s.trig_accumulate(row, 2.0, c, 0.5, sn, 3);
  CHECK(row[0] == 3.0);
  CHECK(row[1] == 1.5);
  CHECK(row[2] == 0.0);
  double lo = 0, hi = 0;
  const double x[4] = {3.0, -7.5, 2.0, 9.25};
  s.min_max(x, 4, &lo, &hi);
  CHECK(lo == -7.5);
  CHECK(hi == 9.25);
  CHECK(s.max_abs(x, 4) == 9.25);
  CHECK(s.max_abs(x, 0) == 0.0);
}

TEST_CASE("vector backends reproduce the scalar reference") {
  std::mt19937_64 rng(2024);
  const auto tables = vector_tables();
  if (tables.empty()) MESSAGE("no vector backend on this machine; only the scalar path is exercised");
  for (const KernelTable* t : tables) {
    CAPTURE(t->name);
    for (std::size_t n = 0; n <= 67; ++n) {
      CAPTURE(n);
      const auto c = random_vec(rng, n, 1.0);
      const auto s = random_vec(rng, n, 1.0);
      auto row_s = random_vec(rng, n, 3.0);
      auto row_v = row_s;
      scalar_table().trig_accumulate(row_s.data(), 0.37, c.data(), -1.25, s.data(), n);
      t->trig_accumulate(row_v.data(), 0.37, c.data(), -1.25, s.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(row_v[i] - row_s[i]) <= 4e-16 * (std::abs(row_s[i]) + 2.0));

      CHECK(t->max_abs(c.data(), n) == scalar_table().max_abs(c.data(), n));
      if (n > 0) {
        double lo_s, hi_s, lo_v, hi_v;
        scalar_table().min_max(row_s.data(), n, &lo_s, &hi_s);
        t->min_max(row_s.data(), n, &lo_v, &hi_v);
        CHECK(lo_v == lo_s);
        CHECK(hi_v == hi_s);
      }
    }
  }
}

TEST_CASE("forcing a backend switches the active table") {
  force_backend(Backend::Scalar);
  CHECK(&active() == &scalar_table());
  reset_backend();
  CHECK(active().name != nullptr);
  if (!table_for(Backend::Neon)) CHECK_THROWS_AS(force_backend(Backend::Neon), lhom::InvalidArgument);
  reset_backend();
}

TEST_CASE("span wrappers dispatch to the active table") {
  std::vector<double> v{-4.0, 1.0, 3.5};
  double lo, hi;
  min_max(v, lo, hi);
  CHECK(lo == -4.0);
  CHECK(hi == 3.5);
  CHECK(max_abs(v) == 4.0);
  std::vector<double> row{0.0, 0.0, 0.0}, c{1.0, 2.0, 3.0}, s{1.0, 1.0, 1.0};
  trig_accumulate(row, 1.0, c, 1.0, s);
  CHECK(row == std::vector<double>{0.0, 1.0, 2.0});
}
