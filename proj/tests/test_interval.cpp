/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ivsid/interval.hpp"
#include "testutil.hpp"

using namespace ivsid;
using interval::Interval;
using interval::IntervalMatrix;

TEST_CASE("interval construction enforces ordering and finiteness") {
  CHECK_NOTHROW(Interval(1.0, 2.0));
  CHECK_NOTHROW(Interval(3.0, 3.0));
  CHECK_THROWS_AS(Interval(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Interval(0.0, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  CHECK_THROWS_AS(Interval(std::nan(""), 1.0), std::invalid_argument);
}

TEST_CASE("addition adds endpoints") {
  const Interval r = interval::add({1, 2}, {3, 4});
  CHECK(r.lo == 4.0);
  CHECK(r.hi == 6.0);
  const Interval z = interval::add({0, 0}, {-1, 1});
  CHECK(z.lo == -1.0);
  CHECK(z.hi == 1.0);
  const Interval n = interval::add({-2, -1}, {-3, -1});
  CHECK(n.lo == -5.0);
  CHECK(n.hi == -2.0);
}

TEST_CASE("subtraction crosses endpoints") {
  const Interval r = interval::sub({1, 2}, {0, 1});
  CHECK(r.lo == 0.0);
  CHECK(r.hi == 2.0);
  const Interval crisp = interval::sub({1, 1}, {1, 1});
  CHECK(crisp.lo == 0.0);
  CHECK(crisp.hi == 0.0);
  // self-subtraction does not vanish for non-degenerate intervals
  const Interval s = interval::sub({-1, 1}, {-1, 1});
  CHECK(s.lo == -2.0);
  CHECK(s.hi == 2.0);
}

TEST_CASE("multiplication takes extrema over endpoint products") {
  const Interval r = interval::mul({-1, 2}, {3, 4});
  CHECK(r.lo == -4.0);
  CHECK(r.hi == 8.0);
  const Interval crisp = interval::mul({2, 2}, {3, 3});
  CHECK(crisp.lo == 6.0);
  CHECK(crisp.hi == 6.0);
  const Interval sym = interval::mul({-1, 1}, {-1, 1});
  CHECK(sym.lo == -1.0);
  CHECK(sym.hi == 1.0);
}

TEST_CASE("multiplication extrema selection breaks ties at lowest index") {
  // all four products equal
  const auto sel = interval::mul_extrema(0.0, 0.0, 1.0, 2.0);
  CHECK(sel.argmin == 0);
  CHECK(sel.argmax == 0);
  // products {2,4,2,4}: min ties between indices 0 and 2, max between 1 and 3
  const auto sel2 = interval::mul_extrema(1.0, 1.0, 2.0, 4.0);
  CHECK(sel2.argmin == 0);
  CHECK(sel2.argmax == 1);
}

TEST_CASE("dot product handles hand examples") {
  std::vector<Interval> u = {{1, 2}, {0, 1}};
  std::vector<Interval> v = {{-1, 1}, {2, 3}};
  const Interval r = interval::dot(u, v);
  CHECK(r.lo == -2.0);
  CHECK(r.hi == 5.0);

  std::vector<Interval> cu = {{1, 1}, {2, 2}, {3, 3}};
  std::vector<Interval> cv = {{4, 4}, {5, 5}, {6, 6}};
  const Interval c = interval::dot(cu, cv);
  CHECK(c.lo == 32.0);
  CHECK(c.hi == 32.0);

  std::vector<Interval> bad = {{0, 1}};
  CHECK_THROWS_AS(interval::dot(bad, cu), std::invalid_argument);
}

TEST_CASE("dot product equals exhaustive endpoint enumeration") {
  Rng rng(42);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    const auto u = testutil::random_interval_vec(rng, n);
    const auto v = testutil::random_interval_vec(rng, n);
    const Interval got = interval::dot(u, v);
    const auto want = testutil::exhaustive_dot(u, v);
    CHECK(got.lo == want.lo);
    CHECK(got.hi == want.hi);
  }
}

TEST_CASE("matrix product reduces to scalar cases") {
  IntervalMatrix a(Tensor(1, 1, {-1.0}), Tensor(1, 1, {2.0}));
  IntervalMatrix b(Tensor(1, 1, {3.0}), Tensor(1, 1, {4.0}));
  const auto c = interval::matmul(a, b);
  CHECK(c.lo(0, 0) == -4.0);
  CHECK(c.hi(0, 0) == 8.0);

  // crisp identity left operand passes the right operand through
  IntervalMatrix eye(Tensor(2, 2, {1, 0, 0, 1}), Tensor(2, 2, {1, 0, 0, 1}));
  IntervalMatrix m(Tensor(2, 2, {-1, 0, 2, 3}), Tensor(2, 2, {1, 1, 2.5, 4}));
  const auto p = interval::matmul(eye, m);
  for (size_t i = 0; i < m.lo.size(); ++i) {
    CHECK(p.lo[i] == m.lo[i]);
    CHECK(p.hi[i] == m.hi[i]);
  }

  IntervalMatrix wrong(Tensor(3, 3), Tensor(3, 3));
  CHECK_THROWS_AS(interval::matmul(a, wrong), std::invalid_argument);
}

TEST_CASE("matrix product entries equal the interval dot of row and column") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 2 + static_cast<int>(rng.next_u64() % 3);
    const int k = 1 + static_cast<int>(rng.next_u64() % 4);
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    Tensor alo(m, k), ahi(m, k), blo(k, n), bhi(k, n);
    for (int i = 0; i < m * k; ++i) {
      const auto iv = testutil::random_interval(rng);
      alo[i] = iv.lo;
      ahi[i] = iv.hi;
    }
    for (int i = 0; i < k * n; ++i) {
      const auto iv = testutil::random_interval(rng);
      blo[i] = iv.lo;
      bhi[i] = iv.hi;
    }
    IntervalMatrix a(alo, ahi), b(blo, bhi);
    const auto c = interval::matmul(a, b);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        std::vector<Interval> row, col;
        for (int l = 0; l < k; ++l) {
          row.push_back(a.at(i, l));
          col.push_back(b.at(l, j));
        }
        const Interval want = interval::dot(row, col);
        CHECK(c.lo(i, j) == want.lo);
        CHECK(c.hi(i, j) == want.hi);
      }
  }
}

TEST_CASE("matrix product contains sampled crisp products") {
  Rng rng(11);
  Tensor alo(3, 3), ahi(3, 3), blo(3, 3), bhi(3, 3);
  for (int i = 0; i < 9; ++i) {
    auto iv = testutil::random_interval(rng);
    alo[i] = iv.lo;
    ahi[i] = iv.hi;
    iv = testutil::random_interval(rng);
    blo[i] = iv.lo;
    bhi[i] = iv.hi;
  }
  IntervalMatrix a(alo, ahi), b(blo, bhi);
  const auto c = interval::matmul(a, b);
  for (int rep = 0; rep < 1000; ++rep) {
    Tensor x(3, 3), y(3, 3);
    for (int i = 0; i < 9; ++i) {
      x[i] = testutil::random_inside(rng, a.at(i / 3, i % 3));
      y[i] = testutil::random_inside(rng, b.at(i / 3, i % 3));
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += x(i, l) * y(l, j);
        CHECK(c.lo(i, j) <= s);
        CHECK(s <= c.hi(i, j));
      }
  }
}

TEST_CASE("activations map endpoints through monotone functions") {
  using interval::Activation;
  const auto sig = interval::activate(Activation::Sigmoid, Interval(0, 0));
  CHECK(sig.lo == 0.5);
  CHECK(sig.hi == 0.5);

  volatile double tv = 0.7;  // keep the compiler from constant-folding tanh
  const double t = tv;
  const auto th = interval::activate(Activation::Tanh, Interval(-t, t));
  CHECK(th.lo == std::tanh(-t));
  CHECK(th.hi == std::tanh(t));
  // odd symmetry holds to within one ulp of the library tanh
  CHECK(testutil::ulp_distance(th.lo, -th.hi) <= 1.0);

  const auto re = interval::activate(Activation::Relu, Interval(-1, 2));
  CHECK(re.lo == 0.0);
  CHECK(re.hi == 2.0);

  CHECK_THROWS_AS(interval::activation_from_string("softmax"),
                  std::invalid_argument);
}

TEST_CASE("hadamard annihilates on zero and degenerates to plain product") {
  IntervalMatrix z(Tensor(2, 2), Tensor(2, 2));
  IntervalMatrix any(Tensor(2, 2, {-1, 2, -3, 4}), Tensor(2, 2, {1, 3, 0, 5}));
  const auto r = interval::hadamard(z, any);
  for (size_t i = 0; i < r.lo.size(); ++i) {
    CHECK(r.lo[i] == 0.0);
    CHECK(r.hi[i] == 0.0);
  }
  Tensor c1(2, 2, {1, -2, 3, -4}), c2(2, 2, {5, 6, -7, 8});
  const auto crisp = interval::hadamard(IntervalMatrix(c1, c1),
                                        IntervalMatrix(c2, c2));
  for (size_t i = 0; i < crisp.lo.size(); ++i) {
    CHECK(crisp.lo[i] == c1[i] * c2[i]);
    CHECK(crisp.hi[i] == c1[i] * c2[i]);
  }
}

TEST_CASE("hadamard contains sampled crisp elementwise products") {
  Rng rng(23);
  Tensor alo(4, 4), ahi(4, 4), blo(4, 4), bhi(4, 4);
  for (int i = 0; i < 16; ++i) {
    auto iv = testutil::random_interval(rng);
    alo[i] = iv.lo;
    ahi[i] = iv.hi;
    iv = testutil::random_interval(rng);
    blo[i] = iv.lo;
    bhi[i] = iv.hi;
  }
  IntervalMatrix a(alo, ahi), b(blo, bhi);
  const auto c = interval::hadamard(a, b);
  for (int rep = 0; rep < 1000; ++rep) {
    for (int i = 0; i < 16; ++i) {
      const double x = testutil::random_inside(rng, a.at(i / 4, i % 4));
      const double y = testutil::random_inside(rng, b.at(i / 4, i % 4));
      const double p = x * y;
      CHECK(c.lo[i] <= p);
      CHECK(p <= c.hi[i]);
    }
  }
}

TEST_CASE("binary operations are inclusion isotone") {
  Rng rng(5);
  for (int rep = 0; rep < 2000; ++rep) {
    const Interval a = testutil::random_interval(rng);
    const Interval b = testutil::random_interval(rng);
    const Interval aw = testutil::widen(rng, a);
    const Interval bw = testutil::widen(rng, b);
    CHECK(interval::add(aw, bw).contains(interval::add(a, b)));
    CHECK(interval::sub(aw, bw).contains(interval::sub(a, b)));
    CHECK(interval::mul(aw, bw).contains(interval::mul(a, b)));
  }
}

TEST_CASE("crisp inputs collapse to ordinary arithmetic") {
  Rng rng(17);
  for (int rep = 0; rep < 2000; ++rep) {
    const double x = rng.uniform(-5, 5);
    const double y = rng.uniform(-5, 5);
    const Interval a = Interval::point(x);
    const Interval b = Interval::point(y);
    CHECK(interval::add(a, b).lo == x + y);
    CHECK(interval::sub(a, b).lo == x - y);
    const Interval m = interval::mul(a, b);
    CHECK(m.lo == x * y);
    CHECK(m.hi == x * y);
  }
}

TEST_CASE("crisp members always land inside interval results") {
  Rng rng(29);
  for (int rep = 0; rep < 5000; ++rep) {
    const Interval a = testutil::random_interval(rng);
    const Interval b = testutil::random_interval(rng);
    const double x = testutil::random_inside(rng, a);
    const double y = testutil::random_inside(rng, b);
    CHECK(interval::add(a, b).contains(x + y));
    CHECK(interval::sub(a, b).contains(x - y));
    CHECK(interval::mul(a, b).contains(x * y));
    using interval::Activation;
    for (Activation act : {Activation::Sigmoid, Activation::Tanh,
                           Activation::Relu, Activation::Identity}) {
      const Interval r = interval::activate(act, a);
      CHECK(r.contains(interval::apply_activation(act, x)));
      CHECK(r.lo <= r.hi);
    }
  }
}

TEST_CASE("interval matrix construction validates shape and ordering") {
  CHECK_THROWS_AS(IntervalMatrix(Tensor(2, 2), Tensor(2, 3)),
                  std::invalid_argument);
  Tensor lo(1, 1, {2.0}), hi(1, 1, {1.0});
  CHECK_THROWS_AS(IntervalMatrix(lo, hi), std::invalid_argument);
}
