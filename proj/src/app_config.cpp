#include "hdlgen/app_config.hpp"

#include <fstream>
#include <sstream>

namespace hdlgen::app {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    return os.str();
}

std::string join_words(const std::vector<std::string>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? " " : "") << v[i];
    return os.str();
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string w;
    while (ss >> w)
        out.push_back(w);
    return out;
}

} // namespace

std::map<std::string, std::string> parse_flat_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValueError("bad config line (expected key = value): " + t);
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::string p = trim(part);
        if (p.empty() || p.find_first_not_of("0123456789-") != std::string::npos)
            throw ValueError("bad integer list element: '" + part + "'");
        out.push_back(std::stoi(p));
    }
    return out;
}

void AppConfig::apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "schedule")
            run.schedule = parse_int_list(value);
        else if (key == "shortcut_w")
            run.shortcut_threshold_w = Rat::from_decimal(value);
        else if (key == "e_f_max")
            run.e_f_max = std::stoi(value);
        else if (key == "temperature")
            run.temperature = Rat::from_decimal(value);
        else if (key == "max_context_tokens")
            run.max_context_tokens = std::stoi(value);
        else if (key == "sim_timeout_seconds") {
            run.sim_timeout_seconds = std::stoi(value);
            sim.timeout_seconds = run.sim_timeout_seconds;
        } else if (key == "jobs")
            run.jobs = std::stoi(value);
        else if (key == "seed")
            run.seed = std::stoull(value);
        else if (key == "baseline_samples")
            run.baseline_samples = std::stoi(value);
        else if (key == "compile_failure_consumes_sample")
            run.compile_failure_consumes_sample = value == "true" || value == "1";
        else if (key == "model")
            live.model = value;
        else if (key == "base_url")
            live.base_url = value;
        else if (key == "api_key_env")
            live.api_key_env = value;
        else if (key == "max_concurrent_requests")
            live.max_concurrent_requests = std::stoi(value);
        else if (key == "sim_compile_cmd")
            sim.compile_cmd = split_words(value);
        else if (key == "sim_run_cmd")
            sim.run_cmd = split_words(value);
        else if (key == "mismatch_pattern")
            sim.mismatch_pattern = value;
        else if (key == "system_prompt")
            system_prompt = value;
        else if (key == "templates_dir")
            templates_dir = value;
        else if (key == "dataset_path")
            dataset_path = value;
        else if (key == "dataset_format")
            dataset_format = value;
        else if (key == "backend")
            backend = value;
        else if (key == "script_file")
            script_file = value;
        else if (key == "transcript_file")
            transcript_file = value;
        else if (key == "baseline")
            baseline = value == "true" || value == "1";
        else
            throw ValueError("unknown config key: " + key);
    }
}

AppConfig AppConfig::from_file(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is)
        throw ValueError("cannot read config: " + file.string());
    std::ostringstream os;
    os << is.rdbuf();
    AppConfig cfg;
    cfg.apply(parse_flat_kv(os.str()));
    return cfg;
}

std::string AppConfig::to_snapshot() const {
    std::ostringstream os;
    os << "schedule = " << join_ints(run.schedule) << "\n";
    os << "shortcut_w = " << run.shortcut_threshold_w.num() << "/"
       << run.shortcut_threshold_w.den() << "\n";
    os << "e_f_max = " << run.e_f_max << "\n";
    os << "temperature = " << run.temperature.num() << "/" << run.temperature.den() << "\n";
    os << "max_context_tokens = " << run.max_context_tokens << "\n";
    os << "sim_timeout_seconds = " << run.sim_timeout_seconds << "\n";
    os << "jobs = " << run.jobs << "\n";
    os << "seed = " << run.seed << "\n";
    os << "baseline_samples = " << run.baseline_samples << "\n";
    os << "compile_failure_consumes_sample = "
       << (run.compile_failure_consumes_sample ? "true" : "false") << "\n";
    os << "model = " << live.model << "\n";
    os << "base_url = " << live.base_url << "\n";
    os << "api_key_env = " << live.api_key_env << "\n";
    os << "max_concurrent_requests = " << live.max_concurrent_requests << "\n";
    os << "sim_compile_cmd = " << join_words(sim.compile_cmd) << "\n";
    os << "sim_run_cmd = " << join_words(sim.run_cmd) << "\n";
    os << "mismatch_pattern = " << sim.mismatch_pattern << "\n";
    os << "system_prompt = " << system_prompt << "\n";
    if (!templates_dir.empty())
        os << "templates_dir = " << templates_dir << "\n";
    if (!dataset_path.empty())
        os << "dataset_path = " << dataset_path << "\n";
    os << "dataset_format = " << dataset_format << "\n";
    os << "backend = " << backend << "\n";
    if (!script_file.empty())
        os << "script_file = " << script_file << "\n";
    if (!transcript_file.empty())
        os << "transcript_file = " << transcript_file << "\n";
    os << "baseline = " << (baseline ? "true" : "false") << "\n";
    return os.str();
}

AppConfig AppConfig::from_snapshot(const std::filesystem::path& file) {
    return from_file(file);
}

} // namespace hdlgen::app
