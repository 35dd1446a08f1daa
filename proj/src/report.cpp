#include "deepesn/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace deepesn {

namespace {

constexpr const char* kLogHeader =
    "task,group,topology,layers,config,rho,omega_in,omega_il,guesses,status,"
    "val_mse_mean,val_mse_std,test_mse_mean,test_mse_std,val_mse_per_guess,test_mse_per_guess,selected";

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string sci(double v)
{
    if (!std::isfinite(v)) return "failed";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string join(const std::vector<double>& values)
{
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ";" : "") + num(values[i]);
    return s;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void write_search(std::ostream& out, const SearchResult& search, const char* group)
{
    for (std::size_t i = 0; i < search.trials.size(); ++i) {
        const auto& t = search.trials[i];
        out << t.task << ',' << group << ',' << topology_name(t.topology) << ',' << t.num_layers << ','
            << t.config_index << ',' << num(t.hyper.rho) << ',' << num(t.hyper.omega_in) << ','
            << num(t.hyper.omega_il) << ',' << t.guesses << ',' << (t.failed ? "failed" : "ok") << ','
            << num(t.validation_mse_mean) << ',' << num(t.validation_mse_std) << ',' << num(t.test_mse_mean) << ','
            << num(t.test_mse_std) << ',' << join(t.validation_mse) << ',' << join(t.test_mse) << ','
            << (search.selected == i ? 1 : 0) << '\n';
    }
}

std::vector<std::string> split_on(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& s, std::size_t line)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("trial log line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::size_t parse_count(const std::string& s, std::size_t line)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("trial log line " + std::to_string(line) + ": bad count '" + s + "'");
    return v;
}

std::vector<double> parse_list(const std::string& s, std::size_t line)
{
    std::vector<double> values;
    if (s.empty()) return values;
    for (const auto& part : split_on(s, ';')) values.push_back(parse_double(part, line));
    return values;
}

}  // namespace

std::string format_report(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "Deep echo state network topology benchmark\n";
    for (const auto& [key, value] : report.metadata) out << "# " << key << ": " << value << '\n';

    for (const auto& task : report.tasks) {
        out << "\n== " << task.task << " ==\n";
        if (!task.error.empty()) {
            out << "error: " << task.error << '\n';
            continue;
        }
        out << pad("Topology", 14) << pad("ESN", 26) << pad("DeepESN", 26) << "Layers\n";
        for (const auto& topo : task.topologies) {
            auto cell = [](const std::optional<SearchResult>& s) -> std::string {
                if (!s) return "-";
                const auto* b = s->best();
                if (!b) return "failed";
                return sci(b->test_mse_mean) + " (" + sci(b->test_mse_std) + ")";
            };
            std::string layers = "-";
            if (topo.deep && topo.deep->best()) layers = std::to_string(topo.deep->best()->num_layers);
            out << pad(topology_name(topo.topology), 14) << pad(cell(topo.shallow), 26) << pad(cell(topo.deep), 26)
                << layers << '\n';
        }

        out << "selected configurations (validation MSE mean):\n";
        auto describe = [&](const TopologyOutcome& topo, const std::optional<SearchResult>& search, const char* group) {
            if (!search) return;
            out << "  " << pad(topology_name(topo.topology), 12) << pad(group, 8);
            if (const auto* b = search->best())
                out << "L=" << b->num_layers << " rho=" << num(b->hyper.rho) << " omega_in=" << num(b->hyper.omega_in)
                    << " omega_il=" << num(b->hyper.omega_il) << " val=" << sci(b->validation_mse_mean) << '\n';
            else
                out << "no trial selected: " << search->error << '\n';
        };
        for (const auto& topo : task.topologies) {
            describe(topo, topo.shallow, "ESN");
            describe(topo, topo.deep, "DeepESN");
        }

        bool any = false;
        for (const auto& c : ordering_checks(ExperimentReport{{}, {task}, {}})) {
            if (!any) out << "ordering DeepESN < ESN:\n";
            any = true;
            out << "  " << pad(c.topology, 12) << (c.deep_better() ? "ok" : "VIOLATED") << " (" << sci(c.deep_test_mse)
                << " vs " << sci(c.shallow_test_mse) << ")\n";
        }
    }

    if (!report.skipped.empty()) {
        out << "\nskipped tasks:\n";
        for (const auto& [task, reason] : report.skipped) out << "  " << task << ": " << reason << '\n';
    }
    return out.str();
}

void write_trial_log(const ExperimentReport& report, std::ostream& out)
{
    out << kLogHeader << '\n';
    for (const auto& task : report.tasks)
        for (const auto& topo : task.topologies) {
            if (topo.shallow) write_search(out, *topo.shallow, "shallow");
            if (topo.deep) write_search(out, *topo.deep, "deep");
        }
}

ExperimentReport read_trial_log(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kLogHeader) throw IoError("trial log is missing its header row");

    ExperimentReport report;
    std::map<std::string, std::size_t> task_index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_on(line, ',');
        if (f.size() != 17) throw IoError("trial log line " + std::to_string(line_no) + ": expected 17 fields");

        TrialResult t;
        t.task = f[0];
        const std::string& group = f[1];
        if (group != "shallow" && group != "deep")
            throw IoError("trial log line " + std::to_string(line_no) + ": unknown group '" + group + "'");
        t.topology = parse_topology(f[2]);
        t.num_layers = parse_count(f[3], line_no);
        t.config_index = parse_count(f[4], line_no);
        t.hyper = {parse_double(f[5], line_no), parse_double(f[6], line_no), parse_double(f[7], line_no)};
        t.guesses = parse_count(f[8], line_no);
        t.failed = f[9] != "ok";
        t.validation_mse_mean = parse_double(f[10], line_no);
        t.validation_mse_std = parse_double(f[11], line_no);
        t.test_mse_mean = parse_double(f[12], line_no);
        t.test_mse_std = parse_double(f[13], line_no);
        t.validation_mse = parse_list(f[14], line_no);
        t.test_mse = parse_list(f[15], line_no);

        auto [it, inserted] = task_index.try_emplace(t.task, report.tasks.size());
        if (inserted) report.tasks.push_back(TaskOutcome{t.task, {}, {}});
        auto& topologies = report.tasks[it->second].topologies;
        auto topo = std::find_if(topologies.begin(), topologies.end(),
                                 [&](const TopologyOutcome& o) { return o.topology == t.topology; });
        if (topo == topologies.end()) {
            topologies.push_back(TopologyOutcome{t.topology, std::nullopt, std::nullopt});
            topo = topologies.end() - 1;
        }
        auto& search = group == "shallow" ? topo->shallow : topo->deep;
        if (!search) search = SearchResult{t.task, t.topology, {}, std::nullopt, {}};
        search->trials.push_back(std::move(t));
    }

    for (auto& task : report.tasks)
        for (auto& topo : task.topologies)
            for (auto* search : {&topo.shallow, &topo.deep}) {
                if (!*search) continue;
                (*search)->selected = select_best((*search)->trials);
                if (!(*search)->selected) (*search)->error = "all trials failed";
            }
    return report;
}

}  // namespace deepesn
