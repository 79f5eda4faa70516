#include <uvol/json_io.hpp>

#include <istream>
#include <map>
#include <ostream>

namespace uvol {

namespace {

Point point_from(const json& j) {
    if (!j.is_array() || j.empty() || j.size() > kMaxDim)
        fail(ErrorCode::kParse, "expected a coordinate array of length 1.." + std::to_string(kMaxDim));
    Point p(static_cast<int>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(ErrorCode::kParse, "coordinates must be numbers");
        p[static_cast<int>(i)] = j[i].get<double>();
    }
    return p;
}

json point_to(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

std::vector<Point> points_from(const json& j) {
    if (!j.is_array()) fail(ErrorCode::kParse, "expected an array of points");
    std::vector<Point> out;
    for (const auto& e : j) out.push_back(point_from(e));
    return out;
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) fail(ErrorCode::kParse, std::string("missing field \"") + name + "\"");
    return *it;
}

}  // namespace

ObjectPtr object_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::kParse, "object description must be a JSON object");
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "box") return std::make_shared<AxisBox>(point_from(field(j, "lo")), point_from(field(j, "hi")));
    if (kind == "simplex") return std::make_shared<Simplex>(points_from(field(j, "vertices")));
    if (kind == "ball") return std::make_shared<Ball>(point_from(field(j, "center")), field(j, "radius").get<double>());
    if (kind == "points") return std::make_shared<DiscretePointSet>(points_from(field(j, "points")));
    if (kind == "polytope") {
        auto normals = points_from(field(j, "normals"));
        const json& offsets = field(j, "offsets");
        if (!offsets.is_array() || offsets.size() != normals.size())
            fail(ErrorCode::kParse, "polytope needs one offset per normal");
        std::vector<Halfspace> hs;
        for (size_t i = 0; i < normals.size(); ++i) hs.push_back({normals[i], offsets[i].get<double>()});
        return std::make_shared<HalfspacePolytope>(std::move(hs), point_from(field(j, "center")),
                                                   field(j, "r").get<double>(), field(j, "R").get<double>());
    }
    fail(ErrorCode::kParse, "unknown object kind \"" + kind + "\"");
}

json object_to_json(const ObjectOracle& obj) {
    const ObjectOracle& x = underlying(obj);
    if (auto* b = dynamic_cast<const AxisBox*>(&x))
        return {{"kind", "box"}, {"lo", point_to(b->box().lo)}, {"hi", point_to(b->box().hi)}};
    if (auto* s = dynamic_cast<const Simplex*>(&x)) {
        json v = json::array();
        for (const auto& p : s->vertices()) v.push_back(point_to(p));
        return {{"kind", "simplex"}, {"vertices", v}};
    }
    if (auto* b = dynamic_cast<const Ball*>(&x))
        return {{"kind", "ball"}, {"center", point_to(b->center())}, {"radius", b->radius()}};
    if (auto* p = dynamic_cast<const HalfspacePolytope*>(&x)) {
        json normals = json::array(), offsets = json::array();
        for (const auto& h : p->halfspaces()) {
            normals.push_back(point_to(h.a));
            offsets.push_back(h.b);
        }
        return {{"kind", "polytope"}, {"normals", normals}, {"offsets", offsets},
                {"center", point_to(p->center())}, {"r", p->r()}, {"R", p->R()}};
    }
    if (auto* d = dynamic_cast<const DiscretePointSet*>(&x)) {
        json pts = json::array();
        for (const auto& p : d->points()) pts.push_back(point_to(p));
        return {{"kind", "points"}, {"points", pts}};
    }
    fail(ErrorCode::kUnsupported, "object kind \"" + x.kind() + "\" has no JSON form");
}

std::string op_name(OpKind op) {
    switch (op) {
        case OpKind::kInsert: return "insert";
        case OpKind::kDelete: return "delete";
        case OpKind::kEstimate: return "estimate";
    }
    return "?";
}

void write_workload(std::ostream& out, const std::vector<WorkloadOp>& ops) {
    for (const auto& op : ops) {
        json j{{"op", op_name(op.op)}};
        if (op.op == OpKind::kEstimate) {
            j["s"] = op.s;
        } else {
            j["id"] = op.label;
            j["object"] = object_to_json(*op.object);
        }
        out << j.dump() << '\n';
    }
}

std::vector<WorkloadOp> read_workload(std::istream& in) {
    std::vector<WorkloadOp> ops;
    std::map<std::int64_t, ObjectPtr> by_label;
    std::string line;
    std::int64_t next_label = 0;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorCode::kParse, "workload line " + std::to_string(lineno) + ": " + e.what());
        }
        WorkloadOp op;
        const std::string name = field(j, "op").get<std::string>();
        if (name == "estimate") {
            op.op = OpKind::kEstimate;
            op.s = j.value("s", std::int64_t{0});
        } else if (name == "insert") {
            op.op = OpKind::kInsert;
            op.label = j.value("id", next_label);
            op.object = object_from_json(field(j, "object"));
            by_label[op.label] = op.object;
        } else if (name == "delete") {
            op.op = OpKind::kDelete;
            op.label = j.value("id", std::int64_t{-1});
            auto it = by_label.find(op.label);
            if (it == by_label.end())
                fail(ErrorCode::kParse, "workload line " + std::to_string(lineno) + ": delete of unknown id");
            op.object = it->second;
        } else {
            fail(ErrorCode::kParse, "workload line " + std::to_string(lineno) + ": unknown op \"" + name + "\"");
        }
        next_label = std::max(next_label, op.label + 1);
        ops.push_back(std::move(op));
    }
    return ops;
}

}  // namespace uvol
