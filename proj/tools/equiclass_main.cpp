#include <CLI11.hpp>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "equiclass/cli.hpp"

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

equiclass::UncertaintySpec parse_uncertainty(const std::string& value, std::string& label) {
    if (value == "identity") {
        label = "identity";
        return equiclass::UncertaintySpec::identity();
    }
    if (value.rfind("diagonal:", 0) == 0) {
        const auto parts = split_list(value.substr(9));
        if (parts.empty()) throw equiclass::Error("diagonal uncertainty needs weights: diagonal:<w,...>");
        Eigen::VectorXd weights(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) weights[static_cast<Eigen::Index>(i)] = std::stod(parts[i]);
        label = "diagonal";
        return equiclass::UncertaintySpec::diagonal(weights);
    }
    throw equiclass::Error("unknown uncertainty '" + value + "' (identity or diagonal:<w,...>)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classification by proximity to equitable efficiency under uncertain DEA"};
    app.require_subcommand(1);

    auto* classify = app.add_subcommand("classify", "Partition objects into performance categories");

    std::string data_path, inputs, outputs, uncertainty = "identity", out_dir = ".";
    equiclass::RunConfig config;
    config.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    classify->add_option("--data", data_path, "CSV file with a header row")->required();
    classify->add_option("--inputs", inputs, "comma-separated input column names")->required();
    classify->add_option("--outputs", outputs, "comma-separated output column names")->required();
    classify->add_option("--categories", config.categories, "number of categories S")->required();
    classify->add_option("--uncertainty", uncertainty, "identity | diagonal:<w,...> (default identity)");
    classify->add_option("--delta", config.delta, "backward-difference step scale (default 1e-3)");
    classify->add_option("--epsilon", config.epsilon, "Gamma feasibility slack (default 1e-4)");
    classify->add_option("--eps-eff", config.eps_eff, "efficiency-equals-one slack (default 1e-6)");
    classify->add_option("--max-iters", config.max_iters, "first-order iteration cap (default 100)");
    classify->add_option("--workers", config.workers, "worker threads (default: hardware)");
    classify->add_flag("--scale", config.scale_data, "min-max scale characteristics to [0.1, 1]");
    classify->add_flag("--plots", config.emit_plots, "write SVG scatter frames (1 input/1 output only)");
    classify->add_option("--out", out_dir, "output directory (default .)");

    CLI11_PARSE(app, argc, argv);

    try {
        config.input_columns = split_list(inputs);
        config.output_columns = split_list(outputs);
        config.uncertainty = parse_uncertainty(uncertainty, config.uncertainty_label);
        config.out_dir = out_dir;
        return equiclass::run(config, data_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "equiclass: %s\n", e.what());
        return 1;
    }
}
