// Reference child for the line-delimited JSON prediction protocol: a
// one-output "model" that returns the first column of each input row.
#include <cstdio>
#include <iostream>
#include <string>

#include <json.hpp>

int main() {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
        if (msg.is_discarded()) return 1;
        const std::string type = msg.value("type", "");
        if (type == "spec") {
            std::cout << nlohmann::json{{"type", "spec"},
                                        {"task", "regression"},
                                        {"n_outputs", 1}}
                             .dump()
                      << "\n"
                      << std::flush;
        } else if (type == "predict") {
            nlohmann::json outputs = nlohmann::json::array();
            for (const auto& row : msg.at("inputs"))
                outputs.push_back(nlohmann::json::array({row.empty() ? 0.0 : row[0].get<double>()}));
            std::cout << nlohmann::json{{"type", "predict"},
                                        {"id", msg.at("id")},
                                        {"outputs", outputs}}
                             .dump()
                      << "\n"
                      << std::flush;
        } else if (type == "shutdown") {
            return 0;
        } else {
            return 1;
        }
    }
    return 0;
}
