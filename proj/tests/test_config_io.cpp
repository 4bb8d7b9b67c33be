#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "panel_logit/aggregation.hpp"
#include "panel_logit/config.hpp"
#include "panel_logit/panel_io.hpp"

using namespace panel_logit;

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "model = dummies\n"
        "gamma = 1.25   # trailing\n"
        "\n"
        "td = 0.1, -0.1, 0.3\n"
        "estimator = A minus-3-7 7\n"
        "estimator = B minus-1-5 7\n"
        "flag = true\n");
    Config c = Config::parse(in);
    CHECK(c.get("model") == "dummies");
    CHECK(c.get_double("gamma") == 1.25);
    CHECK(parse_double_list(c.get("td")) == std::vector<double>{0.1, -0.1, 0.3});
    CHECK(c.get_all("estimator").size() == 2);
    CHECK(c.get_bool_or("flag", false));
    CHECK(c.get_int_or("missing", 7) == 7);
    CHECK_THROWS_AS(c.get("missing"), ConfigError);
    CHECK_THROWS_AS(c.get_int("gamma"), ConfigError);
    c.set("estimator", "C full 7");
    CHECK(c.get_all("estimator") == std::vector<std::string>{"C full 7"});
    c.erase("flag");
    CHECK(!c.has("flag"));
    CHECK_THROWS_AS(c.require_known({"model", "gamma"}), ConfigError);

    std::istringstream bad("no equals sign\n");
    CHECK_THROWS_AS(Config::parse(bad), ConfigError);
    std::istringstream empty_key(" = 3\n");
    CHECK_THROWS_AS(Config::parse(empty_key), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config write round trip") {
    Config c;
    c.add("a", "1");
    c.add("b", "x y");
    c.add("a", "2");
    std::ostringstream out;
    c.write(out);
    std::istringstream in(out.str());
    CHECK(Config::parse(in).entries() == c.entries());
}

TEST_CASE("doubles print in shortest round-trip form") {
    for (double v : {0.1, -0.3, 1.0 / 3.0, 1e-300, 123456789.125, std::numeric_limits<double>::max()})
        CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double_list("1, x"), ConfigError);
}

TEST_CASE("model and DGP from config") {
    Config c;
    c.add("model", "trend");
    c.add("gamma", "0.7");
    c.add("phi", "0.3");
    c.add("n", "100");
    c.add("periods", "8");
    c.add("sigma_eta_sq", "0.5");
    c.add("seed", "9");
    const ModelSpec s = model_from_config(c);
    CHECK(s.is_trend());
    CHECK(s.trend().phi_coef == 0.3);
    CHECK(s.trend().tau == 0.0);
    const DgpConfig d = dgp_from_config(c);
    CHECK(d.n_individuals == 100);
    CHECK(d.seed == 9);

    Config back;
    store_model(back, s);
    store_dgp(back, d);
    CHECK(model_from_config(back).trend().phi_coef == 0.3);
    CHECK(dgp_from_config(back).sigma_eta_sq == 0.5);

    c.set("model", "probit");
    CHECK_THROWS_AS(model_from_config(c), ConfigError);
    c.set("model", "dummies");
    CHECK_THROWS_AS(model_from_config(c), ConfigError);
}

TEST_CASE("mc config from keys") {
    Config c;
    for (auto [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"model", "dummies"}, {"gamma", "1"}, {"td", "0.1,-0.1,0.3,-0.3,-0.1,0.3,0.5,0.2"},
             {"n", "1000"}, {"periods", "8"}, {"sigma_eta_sq", "0.5"}, {"seed", "1"},
             {"replications", "3"}, {"discard", "3"}, {"estimator", "A minus-3-7 7 two-step"}})
        c.add(k, v);
    const McConfig m = mc_from_config(c);
    CHECK(m.replications == 3);
    CHECK(m.discard_prefix == 3);
    REQUIRE(m.estimators.size() == 1);
    CHECK(m.estimators[0].two_step);
    c.set("discard", "8");
    CHECK_THROWS_AS(mc_from_config(c), ConfigError);
}

TEST_CASE("panel csv round trip") {
    const ModelSpec s(TimeDummies{1.0, {0.1, -0.1, 0.3, -0.3, -0.1, 0.3, 0.5, 0.2}});
    const PanelData p = simulate_panel(s, {500, 8, 0.5, 4});
    std::stringstream buf;
    write_panel_csv(buf, p);
    const PanelData q = read_panel_csv(buf);
    CHECK(q.n() == p.n());
    CHECK(q.periods() == p.periods());
    CHECK(aggregate(q, 7) == aggregate(p, 7));
    CHECK(aggregate(q, 5) == aggregate(p, 5));

    const auto path = std::filesystem::temp_directory_path() / "panel_logit_io_test.csv";
    write_panel_csv_file(path.string(), p);
    CHECK(aggregate(read_panel_csv_file(path.string()), 7) == aggregate(p, 7));
    std::filesystem::remove(path);
}

TEST_CASE("panel csv in any row order") {
    std::istringstream in("id,t,y\nb,2,1\na,1,0\nb,1,0\na,2,1\n# note\n");
    const PanelData p = read_panel_csv(in);
    CHECK(p.n() == 2);
    CHECK(p.periods() == 2);
}

TEST_CASE("panel csv errors") {
    auto bad = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(read_panel_csv(in), ConfigError);
    };
    bad("");
    bad("id,t,y\n");
    bad("a,b,c\n1,1,0\n");
    bad("id,t,y\n1,1,2\n");
    bad("id,t,y\n1,1\n");
    bad("id,t,y\n1,1,0\n1,2,1\n2,1,0\n");
    bad("id,t,y\n1,1,0\n1,1,1\n");
    bad("id,t,y\n1,1,0\n1,3,1\n");
    CHECK_THROWS_AS(read_panel_csv_file("/nonexistent.csv"), ConfigError);
}
