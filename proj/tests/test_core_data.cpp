#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "synrl/csv.hpp"
#include "synrl/encoder.hpp"
#include "synrl/errors.hpp"
#include "synrl/schema.hpp"

using namespace synrl;

TEST_CASE("schema json round trip is lossless and stable") {
  const TableSchema schema = testutil::tiny_dataset().schema;
  const std::string once = schema_to_json(schema);
  const TableSchema back = schema_from_json(once);
  CHECK(schema_to_json(back) == once);
  REQUIRE(back.columns.size() == schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    CHECK(back.columns[c].name == schema.columns[c].name);
    CHECK(back.columns[c].kind == schema.columns[c].kind);
    CHECK(back.columns[c].categories == schema.columns[c].categories);
    CHECK(back.columns[c].target_role == schema.columns[c].target_role);
  }
}

TEST_CASE("schema validation rejects malformed schemas") {
  TableSchema s = testutil::tiny_dataset().schema;
  SUBCASE("duplicate column names") {
    s.columns[1].name = s.columns[0].name;
    CHECK_THROWS_AS(s.validate(), SchemaError);
  }
  SUBCASE("categorical with one category") {
    s.columns[2].categories = {"only"};
    CHECK_THROWS_AS(s.validate(), SchemaError);
  }
  SUBCASE("duplicate categories") {
    s.columns[2].categories = {"a", "a"};
    CHECK_THROWS_AS(s.validate(), SchemaError);
  }
  SUBCASE("two target columns") {
    s.columns[0].target_role = TargetRole::Target;
    CHECK_THROWS_AS(s.validate(), SchemaError);
  }
}

TEST_CASE("dataset validation rejects malformed rows") {
  Dataset d = testutil::tiny_dataset();
  SUBCASE("short row") {
    d.rows[3].pop_back();
    CHECK_THROWS_AS(d.validate(), SchemaError);
  }
  SUBCASE("category index out of range") {
    d.rows[0][2] = 2.0;
    CHECK_THROWS_AS(d.validate(), SchemaError);
  }
}

TEST_CASE("split partitions the dataset") {
  Dataset d = testutil::tiny_dataset();
  // replicate rows to n = 101 so the floor rule is visible
  while (d.rows.size() < 101) d.rows.push_back(d.rows[d.rows.size() % 8]);
  for (std::size_t i = 0; i < d.rows.size(); ++i) d.rows[i][0] = double(i);

  const auto [train, test] = split(d, 0.8, 42);
  CHECK(train.n_rows() == 80);  // floor(0.8 * 101)
  CHECK(test.n_rows() == 21);

  std::multiset<double> seen;
  for (const auto& r : train.rows) seen.insert(r[0]);
  for (const auto& r : test.rows) seen.insert(r[0]);
  CHECK(seen.size() == 101);
  CHECK(*seen.begin() == 0.0);
  CHECK(*seen.rbegin() == 100.0);

  const auto [train2, test2] = split(d, 0.8, 42);
  CHECK(train.rows == train2.rows);  // deterministic per seed
  const auto [train3, test3] = split(d, 0.8, 43);
  CHECK(train.rows != train3.rows);
}

TEST_CASE("csv save/load round trip is lossless and byte-deterministic") {
  testutil::TempDir tmp("csv");
  Dataset d = testutil::tiny_dataset();
  d.rows[0][0] = 1.0 / 3.0;  // needs full precision
  save_csv(d, tmp.file("a.csv"));
  const Dataset back = load_csv(tmp.file("a.csv"), d.schema);
  CHECK(back.rows == d.rows);
  save_csv(back, tmp.file("b.csv"));
  CHECK(testutil::slurp(tmp.file("a.csv")) == testutil::slurp(tmp.file("b.csv")));
}

TEST_CASE("schema inference types columns by distinctness") {
  testutil::TempDir tmp("infer");
  std::ofstream out(tmp.file("t.csv"));
  out << "many,few,text\n";
  for (int i = 0; i < 60; ++i) {
    out << i * 1.5 << ',' << i % 3 << ',' << (i % 2 ? "b" : "a") << '\n';
  }
  out.close();

  const TableSchema s = infer_schema(tmp.file("t.csv"));
  CHECK(s.columns[0].kind == ColumnKind::Continuous);   // 60 distinct numerics
  CHECK(s.columns[1].kind == ColumnKind::Categorical);  // 3 distinct
  CHECK(s.columns[1].categories == std::vector<std::string>{"0", "1", "2"});
  CHECK(s.columns[2].kind == ColumnKind::Categorical);
  CHECK(s.columns[2].categories == std::vector<std::string>{"a", "b"});
}

TEST_CASE("schema inference rejects constant columns by name") {
  testutil::TempDir tmp("const");
  std::ofstream out(tmp.file("t.csv"));
  out << "x,frozen\n";
  for (int i = 0; i < 60; ++i) out << i << ",7\n";
  out.close();
  try {
    infer_schema(tmp.file("t.csv"));
    FAIL("expected ConstantColumnError");
  } catch (const ConstantColumnError& e) {
    CHECK(e.column() == "frozen");
  }
}

TEST_CASE("csv loading rejects bad cells") {
  testutil::TempDir tmp("badcsv");
  const TableSchema schema = testutil::tiny_dataset().schema;
  SUBCASE("missing cell") {
    std::ofstream(tmp.file("t.csv")) << "age,bp,flag,outcome\n33,118.5,no\n";
    CHECK_THROWS_AS(load_csv(tmp.file("t.csv"), schema), Error);
  }
  SUBCASE("unknown category") {
    std::ofstream(tmp.file("t.csv")) << "age,bp,flag,outcome\n33,118.5,maybe,0\n";
    CHECK_THROWS_AS(load_csv(tmp.file("t.csv"), schema), Error);
  }
  SUBCASE("header mismatch") {
    std::ofstream(tmp.file("t.csv")) << "age,bp,flag,result\n33,118.5,no,0\n";
    CHECK_THROWS_AS(load_csv(tmp.file("t.csv"), schema), SchemaError);
  }
}

TEST_CASE("encoder z-scores continuous and one-hots categorical columns") {
  const Dataset d = testutil::tiny_dataset();
  const auto enc = FittedEncoder::fit(d);
  CHECK(enc.width() == 2 + 2 + 2);

  const auto m = enc.encode_all(d);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < m.n_rows; ++r) mean += m.row(r)[c];
    mean /= double(m.n_rows);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
      var += (m.row(r)[c] - mean) * (m.row(r)[c] - mean);
    }
    var /= double(m.n_rows);  // population convention
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-12);
  }
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    CHECK(m.row(r)[2] + m.row(r)[3] == 1.0);  // one-hot block
    CHECK(m.row(r)[4] + m.row(r)[5] == 1.0);
  }
}

TEST_CASE("encoder decode inverts encode") {
  const Dataset d = testutil::tiny_dataset();
  const auto enc = FittedEncoder::fit(d);
  for (const auto& row : d.rows) {
    const Row back = enc.decode(enc.encode(row));
    for (std::size_t c = 0; c < row.size(); ++c) {
      CHECK(back[c] == doctest::Approx(row[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("decode breaks one-hot ties toward the lowest index") {
  const Dataset d = testutil::tiny_dataset();
  const auto enc = FittedEncoder::fit(d);
  std::vector<double> v(enc.width(), 0.0);
  v[2] = 0.5;
  v[3] = 0.5;  // tie in the "flag" block
  CHECK(enc.decode(v)[2] == 0.0);
}
