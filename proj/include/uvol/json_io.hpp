#pragma once

#include <uvol/objects.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace uvol {

using nlohmann::json;

ObjectPtr object_from_json(const json& j);
json object_to_json(const ObjectOracle& x);

enum class OpKind { kInsert, kDelete, kEstimate };

struct WorkloadOp {
    OpKind op = OpKind::kEstimate;
    // Label shared by an insert and its matching delete.
    std::int64_t label = -1;
    ObjectPtr object;
    // Suffix start for estimate ops; 0 means the whole live set.
    std::int64_t s = 0;
};

std::string op_name(OpKind op);

void write_workload(std::ostream& out, const std::vector<WorkloadOp>& ops);
std::vector<WorkloadOp> read_workload(std::istream& in);

}  // namespace uvol
