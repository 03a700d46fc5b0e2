#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace bhtn;

TEST_CASE("tensor JSON round trip") {
  std::mt19937_64 rng(21);
  for (const Shape& shape : {Shape{1}, Shape{3, 5}, Shape{2, 3, 4}, Shape{4, 4, 4, 4}, Shape{7, 9, 11}}) {
    const auto t = oracle::random_tensor(rng, shape);
    const json j = tensor_to_json(t);
    REQUIRE(tensor_from_json(json::parse(j.dump())) == t);
    REQUIRE(parse_tensor(j.dump()) == t);
  }
}

TEST_CASE("tensor payload is LSB-first base64") {
  BitTensor t({2, 5});
  t.set_linear(0, true);
  t.set_linear(9, true);
  // bytes 0x01, 0x02
  REQUIRE(tensor_to_json(t)["data"] == "AQI=");
}

TEST_CASE("text format round trip") {
  std::mt19937_64 rng(22);
  const auto t = oracle::random_tensor(rng, {3, 2, 4});
  REQUIRE(tensor_from_text(tensor_to_text(t)) == t);
  REQUIRE(parse_tensor(tensor_to_text(t)) == t);
  REQUIRE(parse_tensor("2 3\n101\n010\n").at({0, 2}));
}

TEST_CASE("malformed inputs raise ParseError") {
  REQUIRE_THROWS_AS(parse_tensor("{\"shape\": [2, 2]}"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("{\"shape\": [2, 0], \"data\": \"\"}"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("{\"shape\": [2, 2], \"data\": \"A*==\"}"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("{\"shape\": [64], \"data\": \"AQI=\"}"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("{not json"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("2 2\n10\n1\n"), ParseError);
  REQUIRE_THROWS_AS(parse_tensor("2 2\n10\n12\n"), ParseError);
  REQUIRE_THROWS_AS(read_file("/nonexistent/bhtn/file"), ParseError);
  REQUIRE_THROWS_AS(matrix_from_json(tensor_to_json(BitTensor({2, 2, 2}))), ParseError);
}

TEST_CASE("QUBO JSON round trip") {
  QuboModel q(4);
  q.linear = {1.5, 0.0, -2.0, 0.25};
  q.add_quadratic(0, 3, -1.0);
  q.add_quadratic(1, 2, 4.0);
  q.offset = 3.0;
  const QuboModel back = qubo_from_json(json::parse(qubo_to_json(q).dump()));
  REQUIRE(back.num_vars == 4);
  REQUIRE(back.linear == q.linear);
  REQUIRE(back.quadratic == q.quadratic);
  REQUIRE(back.offset == q.offset);

  REQUIRE_THROWS_AS(qubo_from_json(json{{"n", 2}, {"linear", {{"5", 1.0}}}}), ParseError);
  REQUIRE_THROWS_AS(qubo_from_json(json{{"n", 2}, {"quadratic", {{"0-1", 1.0}}}}), ParseError);
  REQUIRE_THROWS_AS(qubo_from_json(json{{"linear", json::object()}}), ParseError);
}
