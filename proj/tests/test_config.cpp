#include <doctest.h>

#include <string>

#include "wickbench/config.hpp"

using namespace wb;

TEST_CASE("shipped configs load") {
    for (auto name : {"identities", "gff-cov", "fps-law", "expansion", "multiscale", "gmc", "sausage", "collar", "determinism"}) {
        CAPTURE(name);
        auto c = Config::load(std::string(WICKBENCH_CONFIG_DIR) + "/" + name + ".toml");
        CHECK(!c.experiment().empty());
    }
}

TEST_CASE("defaults and accessors") {
    auto c = Config::parse("experiment = \"gff-cov\"\n");
    CHECK(c.seed() == 1);
    CHECK(c.integer("samples") == 200000);
    CHECK(c.ints("orders") == std::vector<long>{1, 2, 3});
    CHECK(c.num("criteria.z_bound") == 4.0);
    CHECK(c.out_dir() == "results/gff-cov");
    auto d = c.domain();
    CHECK(d.h() == doctest::Approx(2.0 / 32));
    c.set_seed(9);
    CHECK(c.seed() == 9);
    CHECK(c.echo()["seed"] == 9);
    CHECK(c.echo()["domain"]["across"] == 33);
    CHECK_FALSE(c.echo().contains("out_dir"));
}

TEST_CASE("integers are accepted where numbers are expected") {
    auto c = Config::parse("experiment = \"fps-law\"\nv = 2\n");
    CHECK(c.num("v") == 2.0);
}

TEST_CASE("config errors") {
    auto bad = [](const std::string& text) { CHECK_THROWS_AS(Config::parse(text), ConfigError); };
    bad("seed = 3\n");                                         // no experiment
    bad("experiment = \"nope\"\n");                            // unknown experiment
    bad("experiment = \"gmc\"\nsamples = 10\nfoo = 1\n");      // unknown key
    bad("experiment = \"gmc\"\n[criteria]\nbogus = 1\n");      // unknown nested key
    bad("experiment = \"gmc\"\nsamples = \"ten\"\n");          // wrong type
    bad("experiment = \"gmc\"\nsamples = 1.5\n");              // float for integer
    bad("experiment = \"gmc\"\nsamples = 0\n");                // range
    bad("experiment = \"fps-law\"\nv = 0.0\na = 0.5\n");       // a >= v
    bad("experiment = \"fps-law\"\nv_mode = \"cable\"\n");     // bad enum
    bad("experiment = \"fps-law\"\ndelta = 1.5\n");
    bad("experiment = \"expansion\"\ns_grid = [8.0, 4.0]\n");  // not increasing
    bad("experiment = \"expansion\"\nparts = [\"minkowsky\"]\n");
    bad("experiment = \"sausage\"\neps_grid = [0.0]\n");
    bad("experiment = \"sausage\"\neps_grid = []\n");
    bad("experiment = \"gmc\"\nseed = -1\n");
    bad("experiment = \"gmc\"\n[domain]\nshape = \"square\"\n");
    bad("experiment = \"gmc\"\nsamples = \n");                 // TOML syntax
    CHECK_THROWS_AS(Config::load("/nonexistent/x.toml"), ConfigError);
}

TEST_CASE("overrides are validated") {
    auto c = Config::parse("experiment = \"fps-law\"\n");
    c.set("parts", nlohmann::json::array({"mean"}));
    CHECK(c.strs("parts") == std::vector<std::string>{"mean"});
    CHECK_THROWS_AS(c.set("parts", nlohmann::json::array({"nope"})), ConfigError);
    CHECK(c.strs("parts") == std::vector<std::string>{"mean"});
    CHECK_THROWS_AS(c.set("no_such_key", 1), ConfigError);
    CHECK_THROWS_AS(c.set("ks_samples", "many"), ConfigError);
    CHECK_THROWS_AS(c.set("seed", 3), ConfigError);
}
