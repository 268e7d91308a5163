#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "plrm/estimator.hpp"
#include "plrm/io.hpp"

using namespace plrm;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/plrm_test_" + name) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

const char* binary_schema = R"({
  "response": {"column": "y", "levels": ["yes", "no"]},
  "covariates": [{"column": "x1", "kind": "numeric"}]
})";

}  // namespace

TEST_CASE("csv parsing handles quoting and line endings") {
    TempFile f("quoted.csv", "a,b\r\n\"x,\"\"q\"\"\",2\nplain,3\n");
    const auto rows = read_csv(f.path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b"});
    CHECK(rows[1][0] == "x,\"q\"");
    CHECK(rows[2][0] == "plain");
}

TEST_CASE("two-row binary csv loads with the expected dimensions") {
    TempFile data("tiny.csv", "y,x1\nyes,1.5\nno,-0.5\n");
    TempFile schema("tiny.json", binary_schema);
    const auto spec = SchemaSpec::from_file(schema.path);
    const Dataset ds = load_dataset(data.path, spec);
    CHECK(ds.dims.d == 1);
    CHECK(ds.dims.k == 1);
    CHECK(ds.rows() == 2);
    CHECK(ds.X(0, 1) == 1.5);
    CHECK(ds.Y(0, 0) == 1);  // "yes" is level 0; "no" is the baseline
    CHECK(ds.Y(1, 1) == 1);
    CHECK(ds.column_names[1] == "x1");
}

TEST_CASE("categorical covariates expand to dummies against the reference") {
    TempFile data("cat.csv",
                  "y,sympt\nyes,1\nno,2\nyes,3\nno,4\nyes,2\nno,1\n");
    TempFile schema("cat.json", R"({
      "response": {"column": "y", "levels": ["yes", "no"]},
      "covariates": [{"column": "sympt", "kind": "categorical",
                      "levels": ["1", "2", "3", "4"], "reference": "1"}]
    })");
    const auto spec = SchemaSpec::from_file(schema.path);
    const Dataset ds = load_dataset(data.path, spec);
    CHECK(ds.dims.k == 3);  // 4 levels -> 3 dummies
    CHECK(ds.column_names[1] == "sympt=2");
    CHECK(ds.column_names[2] == "sympt=3");
    CHECK(ds.column_names[3] == "sympt=4");
    // row 0: level 1 (reference) -> all dummies zero
    CHECK(ds.X.row(0).tail(3).sum() == 0.0);
    // row 1: level 2 -> first dummy
    CHECK(ds.X(1, 1) == 1.0);
    CHECK(ds.X(1, 2) == 0.0);
}

TEST_CASE("data errors name the offending row and value") {
    TempFile schema("err.json", binary_schema);
    const auto spec = SchemaSpec::from_file(schema.path);

    SUBCASE("unknown response level") {
        TempFile data("badlevel.csv", "y,x1\nyes,1\nmaybe,2\n");
        try {
            load_dataset(data.path, spec);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 2") != std::string::npos);
            CHECK(msg.find("maybe") != std::string::npos);
        }
    }

    SUBCASE("missing cell is not imputed") {
        TempFile data("missing.csv", "y,x1\nyes,\nno,1\n");
        CHECK_THROWS_AS(load_dataset(data.path, spec), data_error);
    }

    SUBCASE("missing schema column") {
        TempFile data("nocol.csv", "y,z\nyes,1\nno,2\n");
        CHECK_THROWS_AS(load_dataset(data.path, spec), data_error);
    }
}

TEST_CASE("grouped and exploded representations agree at lambda = 0") {
    // grouped file with a count column
    TempFile grouped("grouped.csv",
                     "y,x1,n\nyes,1.0,3\nno,1.0,2\nyes,-1.0,1\nno,-1.0,4\n");
    TempFile gschema("gschema.json", R"({
      "response": {"column": "y", "levels": ["yes", "no"]},
      "covariates": [{"column": "x1", "kind": "numeric"}],
      "count_column": "n"
    })");
    std::string exploded_csv = "y,x1\n";
    for (int i = 0; i < 3; ++i) exploded_csv += "yes,1.0\n";
    for (int i = 0; i < 2; ++i) exploded_csv += "no,1.0\n";
    exploded_csv += "yes,-1.0\n";
    for (int i = 0; i < 4; ++i) exploded_csv += "no,-1.0\n";
    TempFile exploded("exploded.csv", exploded_csv);
    TempFile eschema("eschema.json", binary_schema);

    const Dataset dg =
        load_dataset(grouped.path, SchemaSpec::from_file(gschema.path), true);
    const Dataset de =
        load_dataset(exploded.path, SchemaSpec::from_file(eschema.path));
    CHECK(dg.rows() == 2);  // collapsed by covariate pattern
    CHECK(dg.total_trials() == de.total_trials());

    const FitResult fg = fit_mdpde(dg, 0.0);
    const FitResult fe = fit_mdpde(de, 0.0);
    CHECK((fg.beta_hat - fe.beta_hat).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("report serialization round-trips losslessly") {
    Report r;
    r.body["tool"] = "plrm fit";
    r.body["values"] = {0.1, 0.2616346, 1.0 / 3.0, 3.841458820694126};
    r.body["nested"] = {{"a", 1}, {"b", false}};
    const std::string text = r.serialize();
    const Report back = Report::parse(text);
    CHECK(back == r);
    CHECK(back.serialize() == text);
}

TEST_CASE("file hashing is content-determined") {
    TempFile a("hash_a.csv", "y,x\n1,2\n");
    TempFile b("hash_b.csv", "y,x\n1,2\n");
    TempFile c("hash_c.csv", "y,x\n1,3\n");
    CHECK(file_hash(a.path) == file_hash(b.path));
    CHECK(file_hash(a.path) != file_hash(c.path));
}
