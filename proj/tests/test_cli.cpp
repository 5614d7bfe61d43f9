#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "tree_checks.hpp"
#include "trestle/concept_tree.hpp"
#include "trestle/experiments.hpp"
#include "trestle/inference.hpp"

namespace fs = std::filesystem;
using namespace trestle;

namespace {

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / ("trestle_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "/dev/null",
        const std::string& stderr_path = "/dev/null") {
    std::string cmd = std::string(TRESTLE_CLI) + " " + args + " > " + stdout_path + " 2> " + stderr_path;
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

void write_dataset(const std::string& path, const std::vector<StructuredInstance>& xs) {
    std::ofstream out(path);
    for (const auto& x : xs) out << dump_instance(x) << "\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit a single instance") {
    Workdir w;
    write(w.path("one.ndjson"), "{\"a\":\"x\",\"b\":{\"w\":1.5}}\n");
    REQUIRE(run("fit --input " + w.path("one.ndjson") + " --output " + w.path("t.json"), w.path("out")) == 0);
    CHECK(slurp(w.path("out")) == "nodes 1 depth 0\n");
    auto tree = ConceptTree::from_json(nlohmann::json::parse(slurp(w.path("t.json"))));
    CHECK(tree.root().stats.count == 1);
}

TEST_CASE("shuffled fit is reproducible") {
    Workdir w;
    auto data = generate_synthetic(two_class_spec(0.0, 4));
    data.instances.resize(60);
    write_dataset(w.path("d.ndjson"), data.instances);
    std::string base = "fit --input " + w.path("d.ndjson") + " --shuffle --seed 5 --output ";
    REQUIRE(run(base + w.path("a.json")) == 0);
    REQUIRE(run(base + w.path("b.json")) == 0);
    CHECK(slurp(w.path("a.json")) == slurp(w.path("b.json")));
    REQUIRE(run("fit --input " + w.path("d.ndjson") + " --output " + w.path("c.json")) == 0);
    CHECK(slurp(w.path("a.json")) != slurp(w.path("c.json")));
}

TEST_CASE("malformed input names the line") {
    Workdir w;
    write(w.path("bad.ndjson"), "{\"a\":\"x\"}\n{\"a\":\"y\"}\n{\"a\":\n");
    CHECK(run("fit --input " + w.path("bad.ndjson") + " --output " + w.path("t.json"), "/dev/null", w.path("err")) == 1);
    auto err = slurp(w.path("err"));
    CHECK(err.rfind("error: ", 0) == 0);
    CHECK(err.find("line 3") != std::string::npos);
    CHECK(run("fit --input " + w.path("missing.ndjson") + " --output " + w.path("t.json")) == 1);
    CHECK(run("no-such-command") != 0);
}

TEST_CASE("predict matches the library") {
    Workdir w;
    auto data = generate_synthetic(two_class_spec(0.1, 2));
    std::vector<StructuredInstance> train(data.instances.begin(), data.instances.begin() + 80);
    std::vector<StructuredInstance> test(data.instances.begin() + 80, data.instances.begin() + 100);
    write_dataset(w.path("train.ndjson"), train);
    write_dataset(w.path("test.ndjson"), test);
    REQUIRE(run("fit --input " + w.path("train.ndjson") + " --output " + w.path("t.json")) == 0);
    REQUIRE(run("predict --tree " + w.path("t.json") + " --input " + w.path("test.ndjson") +
                " --target success --output " + w.path("p.csv")) == 0);

    ConceptTree tree;
    for (const auto& x : train) tree.fit(x);
    std::istringstream csv(slurp(w.path("p.csv")));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "index,prediction,confidence");
    for (std::size_t i = 0; i < test.size(); ++i) {
        REQUIRE(std::getline(csv, line));
        auto p = predict(tree, test[i], "success");
        std::string expected = std::to_string(i) + "," + format_value(p.value) + ",";
        CHECK(line.rfind(expected, 0) == 0);
        CHECK(std::stod(line.substr(expected.size())) == doctest::Approx(*p.confidence));
    }
}

TEST_CASE("cluster with no splits gives one label") {
    Workdir w;
    auto data = generate_synthetic(three_cluster_spec(1));
    data.instances.resize(30);
    write_dataset(w.path("d.ndjson"), data.instances);
    REQUIRE(run("cluster --input " + w.path("d.ndjson") + " --splits 0 --seed 3", w.path("c.csv")) == 0);
    std::istringstream csv(slurp(w.path("c.csv")));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "instance_index,label_id,path");
    std::set<std::string> labels;
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        auto first = line.find(',');
        labels.insert(line.substr(first + 1, line.find(',', first + 1) - first - 1));
    }
    CHECK(rows == 30);
    CHECK(labels.size() == 1);

    REQUIRE(run("cluster --input " + w.path("d.ndjson") + " --splits 500 --seed 3", "/dev/null", w.path("err")) == 0);
    CHECK(slurp(w.path("err")).find("splits available") != std::string::npos);
}

TEST_CASE("experiments are byte-for-byte reproducible") {
    Workdir w;
    auto t1 = [&](const std::string& tag) {
        return run("experiment task1 --runs 5 --examples 10 --seed 7 --output " + w.path(tag + ".csv") + " --meta " +
                   w.path(tag + ".json"));
    };
    REQUIRE(t1("a") == 0);
    REQUIRE(t1("b") == 0);
    CHECK(slurp(w.path("a.csv")) == slurp(w.path("b.csv")));
    CHECK(slurp(w.path("a.json")) == slurp(w.path("b.json")));
    CHECK(slurp(w.path("a.csv")).rfind("opportunity,mean,ci_halfwidth,n\n", 0) == 0);
    auto meta = nlohmann::json::parse(slurp(w.path("a.json")));
    CHECK(meta["seed"] == 7);
    CHECK(meta["version"] == version);

    auto t2 = [&](const std::string& tag) {
        return run("experiment task2 --runs 2 --splits 1,2 --seed 3 --output " + w.path(tag + ".csv"));
    };
    REQUIRE(t2("c") == 0);
    REQUIRE(t2("d") == 0);
    CHECK(slurp(w.path("c.csv")) == slurp(w.path("d.csv")));
    CHECK(slurp(w.path("c.csv")).rfind("splits,mean_ari,std_ari,n_runs\n1,", 0) == 0);
}

TEST_CASE("export DOT") {
    Workdir w;
    auto data = generate_synthetic(three_cluster_spec(2));
    data.instances.resize(25);
    write_dataset(w.path("d.ndjson"), data.instances);
    REQUIRE(run("fit --input " + w.path("d.ndjson") + " --output " + w.path("t.json")) == 0);
    REQUIRE(run("export-dot --tree " + w.path("t.json") + " --output " + w.path("t.dot")) == 0);
    auto tree = ConceptTree::from_json(nlohmann::json::parse(slurp(w.path("t.json"))));
    CHECK(checks::dot_well_formed(slurp(w.path("t.dot")), tree.node_count()));
    CHECK(slurp(w.path("t.dot")) == tree.to_dot());
}

}  // TEST_SUITE
