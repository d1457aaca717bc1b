#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdlgen/domain.hpp"

namespace hdlgen::app {

struct Dataset {
    std::string name = "custom";   // human | machine | custom
    std::vector<Task> tasks;

    void validate() const;
};

enum class DatasetFormat { VerilogEvalJsonl, Directory };

DatasetFormat dataset_format_from_string(const std::string& s);

/// verilogeval-jsonl: one JSON record per line; problem description ->
/// spec_text, module interface -> module_header, test -> testbench_src,
/// canonical solution -> reference_src.
/// directory: <id>/spec.txt, <id>/dut_header.v, <id>/tb.v, optional ref.v.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Writes the directory layout; load_dataset(write_dataset(d)) == d.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

} // namespace hdlgen::app
