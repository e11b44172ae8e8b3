// Copyright 2026 The crowdplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crowdplan/rational.h"

#include "crowdplan/error.h"
#include "doctest.h"

using crowdplan::Rational;

TEST_CASE("rational normalizes sign and common factors") {
  const Rational r(6, -4);
  CHECK(r.num() == -3);
  CHECK(r.den() == 2);
  CHECK(r.to_string() == "-3/2");
  CHECK(Rational(4, 2).to_string() == "2");
  CHECK_THROWS_AS(Rational(1, 0), crowdplan::InputError);
}

TEST_CASE("rational arithmetic and ordering are exact") {
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 10) * Rational(3) == Rational(3, 10));
  CHECK(Rational(7, 2) - Rational(1, 2) == Rational(3));
  CHECK(Rational(1, 3) < Rational(34, 100));
  CHECK(Rational(2, 6) == Rational(1, 3));
  // 0.1 + 0.2 style accumulation stays exact.
  Rational sum(0);
  for (int i = 0; i < 10; ++i) sum += Rational(1, 10);
  CHECK(sum == Rational(1));
}

TEST_CASE("rational parse") {
  CHECK(Rational::parse("3") == Rational(3));
  CHECK(Rational::parse("21/2") == Rational(21, 2));
  CHECK(Rational::parse("-4/6") == Rational(-2, 3));
  CHECK(Rational::parse("2.5") == Rational(5, 2));
  CHECK_THROWS_AS(Rational::parse("x"), crowdplan::InputError);
  CHECK_THROWS_AS(Rational::parse("1/0"), crowdplan::InputError);
  CHECK_THROWS_AS(Rational::parse(""), crowdplan::InputError);
}

TEST_CASE("floor division counts affordable units") {
  CHECK(Rational(10).floor_div(Rational(3)) == 3);
  CHECK(Rational(21, 2).floor_div(Rational(7, 2)) == 3);
  CHECK(Rational(0).floor_div(Rational(2)) == 0);
}
