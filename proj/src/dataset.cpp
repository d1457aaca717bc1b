#include "hdlgen/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hdlgen::app {

namespace fs = std::filesystem;
using nlohmann::json;

void Dataset::validate() const {
    std::set<std::string> ids;
    for (const auto& t : tasks) {
        t.validate();
        if (!ids.insert(t.task_id).second)
            throw ValueError("duplicate task_id in dataset: " + t.task_id);
    }
}

DatasetFormat dataset_format_from_string(const std::string& s) {
    if (s == "verilogeval-jsonl" || s == "jsonl")
        return DatasetFormat::VerilogEvalJsonl;
    if (s == "directory" || s == "dir")
        return DatasetFormat::Directory;
    throw ValueError("unknown dataset format: " + s);
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw ValueError("cannot read file: " + p.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string first_string(const json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (j.contains(k) && j.at(k).is_string())
            return j.at(k).get<std::string>();
    return "";
}

Dataset load_jsonl(const fs::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ValueError("cannot read dataset: " + path.string());
    Dataset d;
    d.name = path.stem().string();
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad dataset record: ") + e.what(), line_no);
        }
        Task t;
        t.task_id = first_string(j, {"task_id", "problem_id", "name"});
        t.spec_text = first_string(j, {"description", "detail_description", "spec", "prompt_text"});
        t.module_header = first_string(j, {"prompt", "module_header", "interface"});
        t.testbench_src = first_string(j, {"test", "testbench", "tb"});
        std::string ref = first_string(j, {"canonical_solution", "ref", "reference", "solution"});
        if (!ref.empty())
            t.reference_src = ref;
        if (t.testbench_src.empty())
            throw MissingTestbench("dataset record without testbench at line " +
                                   std::to_string(line_no));
        if (t.task_id.empty())
            throw ParseError("dataset record without task_id", line_no);
        d.tasks.push_back(std::move(t));
    }
    d.validate();
    return d;
}

Dataset load_directory(const fs::path& path) {
    Dataset d;
    d.name = path.filename().string();
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_directory())
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        Task t;
        t.task_id = dir.filename().string();
        t.spec_text = read_file(dir / "spec.txt");
        t.module_header = fs::exists(dir / "dut_header.v") ? read_file(dir / "dut_header.v") : "";
        if (!fs::exists(dir / "tb.v"))
            throw MissingTestbench("task directory without tb.v: " + dir.string());
        t.testbench_src = read_file(dir / "tb.v");
        if (fs::exists(dir / "ref.v"))
            t.reference_src = read_file(dir / "ref.v");
        d.tasks.push_back(std::move(t));
    }
    d.validate();
    return d;
}

} // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format) {
    if (format == DatasetFormat::VerilogEvalJsonl)
        return load_jsonl(path);
    return load_directory(path);
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& t : dataset.tasks) {
        fs::path task_dir = dir / t.task_id;
        fs::create_directories(task_dir);
        std::ofstream(task_dir / "spec.txt", std::ios::binary) << t.spec_text;
        std::ofstream(task_dir / "dut_header.v", std::ios::binary) << t.module_header;
        std::ofstream(task_dir / "tb.v", std::ios::binary) << t.testbench_src;
        if (t.reference_src)
            std::ofstream(task_dir / "ref.v", std::ios::binary) << *t.reference_src;
    }
}

} // namespace hdlgen::app
