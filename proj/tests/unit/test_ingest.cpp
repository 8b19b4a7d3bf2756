#include <doctest.h>

#include <cmath>
#include <random>

#include "discovars/error.hpp"
#include "discovars/ingest.hpp"
#include "fixtures.hpp"

using namespace discovars;

TEST_SUITE("ingest") {

TEST_CASE("quoted fields, CRLF and BOM are handled") {
  auto doc = ingest::parse_csv("\xEF\xBB\xBF" "a,\"b,c\",d\r\n1,\"2\",\"x \"\"y\"\"\"\r\n");
  CHECK(doc.header == std::vector<std::string>{"a", "b,c", "d"});
  REQUIRE(doc.rows.size() == 1);
  CHECK(doc.rows[0][2] == "x \"y\"");
}

TEST_CASE("headerless input gets V1..Vd names") {
  auto load = ingest::load_csv("1,2\n3,4\n5,7\n", false);
  CHECK(load.table.names == std::vector<std::string>{"V1", "V2"});
  CHECK(load.table.rows() == 3);
}

TEST_CASE("ragged rows and empty input are rejected") {
  CHECK_THROWS_AS(ingest::parse_csv("a,b\n1\n"), DataError);
  CHECK_THROWS_AS(ingest::parse_csv(""), DataError);
  CHECK_THROWS_AS(ingest::parse_csv("a,b\n\"1,2\n"), DataError);
}

TEST_CASE("text columns are dropped with a warning, missing rows removed") {
  auto load = ingest::load_csv("id,x,y,z\nA,1,2,3\nB,NA,3,4\nC,2,,5\nD,3,4,6\nE,5,1,9\n");
  CHECK(load.table.names == std::vector<std::string>{"x", "y", "z"});
  REQUIRE(load.dropped_columns.size() == 1);
  CHECK(load.dropped_columns[0].column == "id");
  CHECK(load.dropped_rows == 2);
  CHECK(load.table.rows() == 3);
  CHECK(load.table.values(2, 2) == 9.0);
}

TEST_CASE("no numeric columns is an error") {
  CHECK_THROWS_AS(ingest::load_csv("a,b\nx,y\nz,w\n"), DataError);
}

TEST_CASE("constant columns are detected") {
  DataTable t({"a", "b", "c"}, (Eigen::MatrixXd(3, 3) << 1, 5, 2, 2, 5, 2, 3, 5, 2).finished());
  auto res = ingest::drop_constant_columns(t);
  CHECK(res.dropped == std::vector<std::string>{"b", "c"});
  CHECK(res.table.names == std::vector<std::string>{"a"});
  DataTable all({"b"}, Eigen::MatrixXd::Constant(4, 1, 3.0));
  CHECK_THROWS_AS(ingest::drop_constant_columns(all), DataError);
}

TEST_CASE("DataTable validation") {
  DataTable dup({"a", "a"}, Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(dup.validate(), DataError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(DataTable({"a"}, bad).validate(), DataError);
  CHECK_THROWS_AS(DataTable({"a"}, Eigen::MatrixXd::Zero(2, 2)), DataError);
}

TEST_CASE("standardize gives mean 0 and population sd 1, and inverts") {
  std::mt19937_64 rng(3);
  DataTable t({"a", "b", "c"}, fixture::gaussian(rng, 50, 3) * 4.0 + Eigen::MatrixXd::Constant(50, 3, 7.0));
  auto [z, rec] = ingest::standardize(t);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(std::abs(z.values.col(j).mean()) < 1e-12);
    CHECK(std::abs(z.values.col(j).squaredNorm() / 50.0 - 1.0) < 1e-12);
  }
  auto back = ingest::unstandardize(z, rec);
  CHECK((back.values - t.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("returns use the current price as denominator by default") {
  DataTable p({"BTC", "ETH"}, (Eigen::MatrixXd(5, 2) << 100, 10, 110, 11, 121, 10, 110, 12, 100, 12).finished());
  auto r = ingest::compute_returns(p, 2);
  CHECK(r.names == std::vector<std::string>{"BTC_RTN", "BTC_RTN_LG1", "BTC_RTN_LG2", "ETH_RTN", "ETH_RTN_LG1",
                                            "ETH_RTN_LG2"});
  REQUIRE(r.rows() == 2);
  // row 0 is t = 3 (0-based price index)
  CHECK(r.values(0, 0) == doctest::Approx((110.0 - 121.0) / 110.0));
  CHECK(r.values(0, 1) == doctest::Approx((121.0 - 110.0) / 121.0));
  CHECK(r.values(0, 2) == doctest::Approx((110.0 - 100.0) / 110.0));
  CHECK(r.values(1, 0) == doctest::Approx((100.0 - 110.0) / 100.0));
  CHECK(r.values(1, 4) == doctest::Approx(r.values(0, 3)));

  auto prev = ingest::compute_returns(p, 0, ingest::ReturnDenominator::previous);
  CHECK(prev.names == std::vector<std::string>{"BTC_RTN", "ETH_RTN"});
  CHECK(prev.rows() == 4);
  CHECK(prev.values(0, 0) == doctest::Approx(0.1));
}

TEST_CASE("returns reject non-positive prices with the row number") {
  DataTable p({"A"}, (Eigen::MatrixXd(4, 1) << 1, 2, 0, 3).finished());
  try {
    (void)ingest::compute_returns(p, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest::compute_returns(p.select(std::vector<std::string>{"A"}), 3), DataError);
}

TEST_CASE("date column must ascend strictly") {
  auto ok = ingest::parse_csv("date,a\n2020-01-01,1\n2020-01-02,2\n");
  CHECK_NOTHROW(ingest::require_ascending_dates(ok, "date"));
  auto bad = ingest::parse_csv("date,a\n2020-01-02,1\n2020-01-02,2\n");
  CHECK_THROWS_AS(ingest::require_ascending_dates(bad, "date"), DataError);
  CHECK_THROWS_AS(ingest::require_ascending_dates(ok, "when"), DataError);
}

TEST_CASE("to_csv round-trips exactly") {
  std::mt19937_64 rng(9);
  DataTable t({"a", "b"}, fixture::gaussian(rng, 20, 2));
  auto back = ingest::load_csv(ingest::to_csv(t));
  CHECK(back.table == t);
}

TEST_CASE("BostonHousing file loads as 506 x 14") {
  auto load = ingest::load_csv_file(DISCOVARS_DATA_DIR "/boston_housing.csv");
  CHECK(load.table.rows() == 506);
  CHECK(load.table.cols() == 14);
  CHECK(load.table.without("chas").cols() == 13);
}

}
