#include "qtree/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qtree {

using nlohmann::json;

namespace {

std::string tag_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    if (value.is_number()) {
        std::ostringstream os;
        os << value.get<double>();
        return os.str();
    }
    throw std::invalid_argument("group must be a string or a number");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cell.push_back('"');
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    for (auto& c : cells) {
        const auto first = c.find_first_not_of(" \t");
        const auto last = c.find_last_not_of(" \t");
        c = first == std::string::npos ? std::string() : c.substr(first, last - first + 1);
    }
    return cells;
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void finish_labels_and_prior(ProblemInstance& instance, const std::vector<std::string>& tags,
                             std::size_t tagged, std::size_t priced) {
    const auto m = static_cast<std::size_t>(instance.num_objects);
    if (tagged != 0 && tagged != m)
        throw std::invalid_argument("group must be given for every object or for none");
    if (priced != 0 && priced != m)
        throw std::invalid_argument("prior must be given for every object or for none");
    if (priced == 0) instance.prior.assign(m, 1.0 / static_cast<double>(m));
    if (tagged == m) assign_groups(instance, tags);
}

int node_to_json(const DecisionTree& tree, int k, json& out) {
    const TreeNode& node = tree.nodes[k];
    if (node.is_leaf()) {
        out = json{{"objects", node.objects}};
        return k;
    }
    json zero, one;
    node_to_json(tree, node.zero, zero);
    node_to_json(tree, node.one, one);
    out = json{{"query", node.query}, {"zero", std::move(zero)}, {"one", std::move(one)}};
    return k;
}

void node_from_json(const json& doc, DecisionTree& tree) {
    const int slot = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (doc.contains("objects")) {
        tree.nodes[slot].objects = doc.at("objects").get<ObjectSet>();
        return;
    }
    if (!doc.contains("query") || !doc.contains("zero") || !doc.contains("one"))
        throw std::invalid_argument("tree node needs either objects or query/zero/one");
    tree.nodes[slot].query = doc.at("query").get<int>();
    if (tree.nodes[slot].query < 0) throw std::invalid_argument("query index must be nonnegative");
    tree.nodes[slot].zero = static_cast<int>(tree.nodes.size());
    node_from_json(doc.at("zero"), tree);
    tree.nodes[slot].one = static_cast<int>(tree.nodes.size());
    node_from_json(doc.at("one"), tree);
}

}  // namespace

json instance_to_json(const ProblemInstance& instance) {
    json queries = json::array();
    for (int j = 0; j < instance.num_queries; ++j) queries.push_back(instance.query_name(j));
    json objects = json::array();
    for (int i = 0; i < instance.num_objects; ++i) {
        json row = json::array();
        for (int j = 0; j < instance.num_queries; ++j) row.push_back(instance.response(i, j) ? 1 : 0);
        json object{{"name", instance.object_name(i)}, {"prior", instance.prior[i]}};
        if (instance.has_labels()) object["group"] = instance.group_name(instance.labels[i] - 1);
        object["responses"] = std::move(row);
        objects.push_back(std::move(object));
    }
    return json{{"queries", std::move(queries)}, {"objects", std::move(objects)}};
}

ProblemInstance instance_from_json(const json& doc) {
    ProblemInstance instance;
    const auto& objects = doc.at("objects");
    if (!objects.is_array() || objects.empty()) throw std::invalid_argument("objects must be a nonempty array");
    if (doc.contains("queries")) instance.query_names = doc.at("queries").get<std::vector<std::string>>();
    instance.num_objects = static_cast<int>(objects.size());
    instance.num_queries = doc.contains("queries")
                               ? static_cast<int>(instance.query_names.size())
                               : static_cast<int>(objects.front().at("responses").size());

    std::vector<std::string> tags;
    std::size_t priced = 0;
    for (const auto& object : objects) {
        const auto& row = object.at("responses");
        if (row.size() != static_cast<std::size_t>(instance.num_queries))
            throw std::invalid_argument("object responses length differs from the query count");
        for (const auto& bit : row) {
            const int b = bit.get<int>();
            if (b != 0 && b != 1) throw std::invalid_argument("responses must be 0 or 1");
            instance.responses.push_back(static_cast<std::uint8_t>(b));
        }
        instance.object_names.push_back(object.value("name", std::string()));
        if (object.contains("prior")) {
            instance.prior.push_back(object.at("prior").get<double>());
            ++priced;
        }
        if (object.contains("group") && !object.at("group").is_null()) tags.push_back(tag_text(object.at("group")));
    }
    finish_labels_and_prior(instance, tags, tags.size(), priced);
    return instance;
}

std::string instance_to_csv(const ProblemInstance& instance) {
    std::ostringstream os;
    os.precision(17);
    os << "name,group,prior";
    for (int j = 0; j < instance.num_queries; ++j) os << ',' << csv_escape(instance.query_name(j));
    os << '\n';
    for (int i = 0; i < instance.num_objects; ++i) {
        os << csv_escape(instance.object_name(i)) << ',';
        if (instance.has_labels()) os << csv_escape(instance.group_name(instance.labels[i] - 1));
        os << ',' << instance.prior[i];
        for (int j = 0; j < instance.num_queries; ++j) os << ',' << (instance.response(i, j) ? 1 : 0);
        os << '\n';
    }
    return os.str();
}

ProblemInstance instance_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    const auto header = split_csv_line(line);
    if (header.size() < 4) throw std::invalid_argument("CSV header needs name, group, prior and at least one query");

    ProblemInstance instance;
    instance.query_names.assign(header.begin() + 3, header.end());
    instance.num_queries = static_cast<int>(instance.query_names.size());

    std::vector<std::string> tags;
    std::size_t priced = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        instance.object_names.push_back(cells[0]);
        if (!cells[1].empty()) tags.push_back(cells[1]);
        if (!cells[2].empty()) {
            instance.prior.push_back(std::stod(cells[2]));
            ++priced;
        }
        for (std::size_t c = 3; c < cells.size(); ++c) {
            if (cells[c] != "0" && cells[c] != "1")
                throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": response '" +
                                            cells[c] + "' is not 0 or 1");
            instance.responses.push_back(cells[c] == "1" ? 1 : 0);
        }
        ++instance.num_objects;
    }
    if (instance.num_objects == 0) throw std::invalid_argument("CSV has no object rows");
    finish_labels_and_prior(instance, tags, tags.size(), priced);
    return instance;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
}

static bool has_csv_extension(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

ProblemInstance load_instance(const std::string& path) {
    if (has_csv_extension(path)) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        return instance_from_csv(in);
    }
    return instance_from_json(json::parse(read_file(path)));
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
    write_file(path, has_csv_extension(path) ? instance_to_csv(instance)
                                             : instance_to_json(instance).dump(2) + "\n");
}

json tree_to_json(const DecisionTree& tree) {
    json out;
    if (!tree.nodes.empty()) node_to_json(tree, 0, out);
    return out;
}

DecisionTree tree_from_json(const json& doc, Mode mode) {
    DecisionTree tree;
    tree.mode = mode;
    node_from_json(doc, tree);
    return tree;
}

}  // namespace qtree
