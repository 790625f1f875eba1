#pragma once

#include <string>
#include <string_view>

#include "jtms/graph.hpp"

namespace jtms {

// Graph dump, one record per line:
//   jtms-graph 1
//   n <high_count> <low_count>
//   e <u> <v> <HH|LL|HL> <cut_cost>
// Costs are printed as the shortest decimal that round-trips.
std::string dump_graph(const JointGraph& g);
JointGraph parse_graph(std::string_view text);

// Solution dump:
//   jtms-sol 1
//   c <node> <component>
std::string dump_solution(const Decomposition& d);
Decomposition parse_solution(std::string_view text);

JointGraph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const JointGraph& g);
Decomposition read_solution_file(const std::string& path);
void write_solution_file(const std::string& path, const Decomposition& d);

}  // namespace jtms
