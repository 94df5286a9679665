#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "equiclass/cli.hpp"

using namespace equiclass;
namespace fs = std::filesystem;

namespace {

/// Minimal well-formedness check for the SVG output: every open tag closes
/// in order; declarations and self-closing tags are allowed.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        const std::size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty()) return false;
        if (tag.front() == '?' || tag.front() == '!') continue;
        if (tag.front() == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        if (tag.back() == '/') continue;  // self-closing
        const std::size_t space = tag.find_first_of(" \t\r\n");
        stack.push_back(space == std::string::npos ? tag : tag.substr(0, space));
    }
    return stack.empty();
}

std::string write_temp_csv(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

const char* kTierCsv =
    "id,semidev,avgret\n"
    "A1,1.0,2.0\nA2,1.15,2.2\nA3,1.3,2.35\n"
    "B1,2.5,1.2\nB2,2.65,1.4\nB3,2.8,1.55\n";

}  // namespace

TEST_CASE("csv parser handles RFC-4180 quoting") {
    std::stringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",3\nplain,,\n");
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"x,1", "say \"hi\"", "3"});
    CHECK(rows[2] == std::vector<std::string>{"plain", "", ""});
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("q\"q") == "\"q\"\"q\"");
}

TEST_CASE("ingest_csv selects columns by name") {
    const auto path = write_temp_csv("equiclass_tiers.csv", kTierCsv);
    const CharacteristicTable table = ingest_csv(path, {{"semidev"}, {"avgret"}});
    CHECK(table.num_objects() == 6);
    CHECK(table.num_inputs() == 1);
    CHECK(table.num_outputs() == 1);
    CHECK(table.object_ids[0] == "A1");
    CHECK(table.inputs(0, 3) == 2.5);
    CHECK(table.outputs(0, 5) == 1.55);
}

TEST_CASE("ingest_csv error paths") {
    const auto path = write_temp_csv("equiclass_tiers2.csv", kTierCsv);
    CHECK_THROWS_AS(ingest_csv(path, {{"nope"}, {"avgret"}}), MissingColumn);

    const auto empty = write_temp_csv("equiclass_empty.csv", "id,semidev,avgret\n");
    CHECK_THROWS_AS(ingest_csv(empty, {{"semidev"}, {"avgret"}}), ParseError);

    const auto bad = write_temp_csv("equiclass_bad.csv", "id,x,y\na,foo,1\n");
    CHECK_THROWS_AS(ingest_csv(bad, {{"x"}, {"y"}}), ParseError);

    const auto nonpos = write_temp_csv("equiclass_nonpos.csv", "id,x,y\na,0.0,1\nb,1,1\n");
    CHECK_THROWS_AS(ingest_csv(nonpos, {{"x"}, {"y"}}), NonPositiveInput);
}

TEST_CASE("characteristic scaling maps rows onto [0.1, 1]") {
    CharacteristicTable table;
    table.object_ids = {"a", "b", "c"};
    table.inputs.resize(1, 3);
    table.inputs << 2.0, 4.0, 6.0;
    table.outputs.resize(1, 3);
    table.outputs << 5.0, 5.0, 5.0;
    const CharacteristicTable scaled = scale_characteristics(table);
    CHECK(scaled.inputs(0, 0) == Catch::Approx(0.1));
    CHECK(scaled.inputs(0, 1) == Catch::Approx(0.55));
    CHECK(scaled.inputs(0, 2) == Catch::Approx(1.0));
    CHECK(scaled.outputs.row(0).isConstant(1.0));
}

TEST_CASE("run config validation") {
    RunConfig config;
    config.input_columns = {"x"};
    config.output_columns = {"x"};
    CHECK_THROWS_AS(config.validate(), Error);
    config.output_columns = {"y"};
    CHECK_NOTHROW(config.validate());
    config.delta = 0.0;
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("run writes a deterministic report and valid artifacts") {
    const auto path = write_temp_csv("equiclass_run.csv", kTierCsv);

    const auto run_with = [&](int workers, const std::string& dir) {
        RunConfig config;
        config.categories = 2;
        config.input_columns = {"semidev"};
        config.output_columns = {"avgret"};
        config.workers = workers;
        config.emit_plots = true;
        config.out_dir = dir;
        REQUIRE(run(config, path) == 0);
        std::ifstream in(fs::path(dir) / "report.json");
        nlohmann::json report = nlohmann::json::parse(in);
        return report;
    };

    const fs::path base = fs::temp_directory_path() / "equiclass_run_out";
    nlohmann::json serial = run_with(1, (base / "w1").string());
    nlohmann::json parallel = run_with(2, (base / "w2").string());

    serial.erase("timing");
    parallel.erase("timing");
    CHECK(serial == parallel);

    CHECK(serial["schema_version"] == 1);
    CHECK(serial["history"].size() >= 1);
    CHECK(serial["history"][0]["phase"] == "initial");
    for (const auto& phase : serial["history"]) {
        CHECK(phase["per_category"].size() == 2);
        for (const auto& cat : phase["per_category"]) {
            CHECK(cat["lower_bound"].get<double>() <=
                  cat["proximity"].get<double>() + 1e-9);
            CHECK(cat["proximity"].get<double>() <= cat["upper_bound"].get<double>() + 1e-9);
        }
    }

    // classification.csv lists every object exactly once.
    std::ifstream csv(base / "w1" / "classification.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "object_id,category");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);

    // SVG frames: well-formed XML with exactly T glyphs.
    for (std::size_t k = 0; k < serial["history"].size(); ++k) {
        std::ifstream svg(base / "w1" / "plots" / ("step_" + std::to_string(k) + ".svg"));
        REQUIRE(svg.good());
        std::stringstream buf;
        buf << svg.rdbuf();
        const std::string text = buf.str();
        CHECK(xml_well_formed(text));
        int glyphs = 0;
        for (std::size_t pos = 0; (pos = text.find("class=\"glyph\"", pos)) != std::string::npos; ++pos)
            ++glyphs;
        CHECK(glyphs == 6);
    }
}
