#include "lait/task.hpp"

#include <stdexcept>

#include "lait/errors.hpp"

namespace lait {

namespace {

TemplateSlot lit(std::string prefix, std::string field) {
    return TemplateSlot{std::move(prefix), "", std::move(field)};
}

std::map<std::string, TaskTemplate> make_builtins() {
    std::map<std::string, TaskTemplate> t;
    t["mnli"] = {"mnli",
                 {lit("hypothesis", "hypothesis"), lit("premise", "premise")},
                 {"entailment", "contradiction", "neutral"}};
    t["rte"] = {"rte",
                {lit("hypothesis", "hypothesis"), lit("premise", "premise")},
                {"entailment", "not_entailment"}};
    t["qqp"] = {"qqp",
                {lit("question1", "question1"), lit("question2", "question2")},
                {"duplicate", "not_duplicate"}};
    // STSB is a regression task; it is carried for segmentation and cost
    // analysis only, so it has no label set here.
    t["stsb"] = {"stsb", {lit("sentence1", "sentence1"), lit("sentence2", "sentence2")}, {}};
    t["wic"] = {"wic",
                {TemplateSlot{"", "word", "sentence1"}, TemplateSlot{"", "word", "sentence2"}},
                {"true", "false"}};
    t["boolq"] = {"boolq", {lit("question", "question"), lit("passage", "passage")},
                  {"true", "false"}};
    t["boolq_split"] = {"boolq_split",
                        {lit("question", "question"), lit("passage1", "passage1"),
                         lit("passage2", "passage2"), lit("passage3", "passage3"),
                         lit("passage4", "passage4"), lit("passage5", "passage5")},
                        {"true", "false"}};
    t["fever"] = {"fever",
                  {lit("hypothesis", "claim"), lit("premise", "evidence")},
                  {"supported", "refuted", "notenoughinfo"}};
    t["vitaminc"] = {"vitaminc",
                     {lit("hypothesis", "claim"), lit("premise", "evidence")},
                     {"supports", "refutes", "notenoughinfo"}};
    t["ae"] = {"ae",
               {lit("question", "question"), lit("answer1", "answer1"), lit("answer2", "answer2")},
               {"true", "false"}};
    t["multirc"] = {"multirc",
                    {lit("question", "question"), lit("answer", "answer"),
                     lit("paragraph", "paragraph")},
                    {"true", "false"}};
    return t;
}

}  // namespace

const std::map<std::string, TaskTemplate>& builtin_tasks() {
    static const std::map<std::string, TaskTemplate> tasks = make_builtins();
    return tasks;
}

const TaskTemplate& find_task(const std::string& task_id) {
    const auto& tasks = builtin_tasks();
    auto it = tasks.find(task_id);
    if (it == tasks.end()) throw InputError("unknown task: " + task_id);
    return it->second;
}

std::vector<std::string> apply_template(const TaskTemplate& tmpl,
                                        const std::map<std::string, std::string>& fields) {
    auto lookup = [&](const std::string& name) -> const std::string& {
        auto it = fields.find(name);
        if (it == fields.end())
            throw InputError("task " + tmpl.task_id + ": missing field '" + name + "'");
        return it->second;
    };
    std::vector<std::string> out;
    out.reserve(tmpl.slots.size());
    for (const auto& slot : tmpl.slots) {
        const std::string& prefix =
            slot.prefix_field.empty() ? slot.prefix : lookup(slot.prefix_field);
        out.push_back(prefix + ": " + lookup(slot.field));
    }
    return out;
}

}  // namespace lait
