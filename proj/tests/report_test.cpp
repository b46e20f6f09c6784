#include "ocmc/report.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "ocmc/errors.hpp"

namespace ocmc {
namespace {

using json = nlohmann::json;

TEST(FormatNumber, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-1.0 / 3.0), "-0.33333333333333331");
  EXPECT_THROW(format_number(std::nan("")), Error);
  for (double v : {1e-300, 6.02214076e23, -7.3181883222711221e-12, 0.1 + 0.2}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(WriteJson, SortedKeysAndFullPrecision) {
  json doc = {{"zeta", 1}, {"alpha", {0.1, 2.5}}, {"mid", {{"b", true}, {"a", "x"}}}};
  std::ostringstream s;
  write_json(s, doc);
  EXPECT_EQ(s.str(),
            "{\n"
            "  \"alpha\": [0.10000000000000001, 2.5],\n"
            "  \"mid\": {\n"
            "    \"a\": \"x\",\n"
            "    \"b\": true\n"
            "  },\n"
            "  \"zeta\": 1\n"
            "}\n");
  EXPECT_EQ(json::parse(s.str()), doc);
}

TEST(Csv, EmptyScanIsHeaderOnly) {
  Table t;
  t.header = {"a", "b"};
  std::ostringstream s;
  write_csv(s, t);
  EXPECT_EQ(s.str(), "a,b\n");
  std::istringstream in(s.str());
  const Table back = read_csv(in);
  EXPECT_EQ(back.header, t.header);
  EXPECT_TRUE(back.rows.empty());
}

TEST(Csv, SingleRowRoundTrip) {
  const json doc = {{"xi", {0.1, -2.0, 1e-17}},
                    {"name", "with,comma \"quoted\""},
                    {"ok", false},
                    {"iterations", 4},
                    {"value", -0.0025713188153889560}};
  std::ostringstream s;
  emit_report(s, doc, ReportFormat::kCsv);
  std::istringstream in(s.str());
  const Table back = read_csv(in);
  const Table ref = flatten(doc);
  ASSERT_EQ(back.header, ref.header);
  ASSERT_EQ(back.rows.size(), 1u);
  for (std::size_t i = 0; i < ref.header.size(); ++i) {
    EXPECT_EQ(back.rows[0][i], ref.rows[0][i]) << ref.header[i];
  }
}

TEST(Csv, JsonAndCsvEncodeIdenticalNumbers) {
  const json doc = {{"rows",
                     {{{"x", 1.0 / 7.0}, {"y", 3e-12}},
                      {{"x", -2.5}, {"y", 1e300}}}}};
  std::ostringstream js;
  std::ostringstream cs;
  emit_report(js, doc, ReportFormat::kJson);
  emit_report(cs, doc, ReportFormat::kCsv);
  const json parsed = json::parse(js.str());
  std::istringstream in(cs.str());
  const Table t = read_csv(in);
  ASSERT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
  ASSERT_EQ(t.rows.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(t.rows[r][0].get<double>(), parsed["rows"][r]["x"].get<double>());
    EXPECT_EQ(t.rows[r][1].get<double>(), parsed["rows"][r]["y"].get<double>());
  }
}

TEST(Csv, FlattenUnionsColumns) {
  const json doc = {{"checks", {{{"a", 1}}, {{"b", 2.5}}}}};
  const Table t = flatten(doc);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(t.rows[0][1].is_null());
  EXPECT_TRUE(t.rows[1][0].is_null());
}

TEST(Format, Parsing) {
  EXPECT_EQ(parse_format("csv"), ReportFormat::kCsv);
  EXPECT_EQ(parse_format("json"), ReportFormat::kJson);
  EXPECT_THROW(parse_format("xml"), Error);
}

}  // namespace
}  // namespace ocmc
