#pragma once

#include <map>
#include <string>
#include <vector>

namespace lait {

// One segment slot of a task template. The rendered string is
// "<prefix>: <field value>", where the prefix is either a literal or, as in
// WiC, pulled from another field of the example.
struct TemplateSlot {
    std::string prefix;        // literal prefix text, without the ": "
    std::string prefix_field;  // when nonempty, the prefix is this field's value
    std::string field;         // field whose text fills the slot
};

struct TaskTemplate {
    std::string task_id;
    std::vector<TemplateSlot> slots;
    std::vector<std::string> labels;  // empty for tasks used only for cost analysis
};

// Built-in tasks, keyed by task_id: mnli, rte, qqp, stsb, wic, boolq,
// boolq_split, fever, vitaminc, ae, multirc. The "raw" task has no template;
// its fields are already-split segments.
const std::map<std::string, TaskTemplate>& builtin_tasks();

const TaskTemplate& find_task(const std::string& task_id);

// Renders one string per template slot, order preserved.
std::vector<std::string> apply_template(const TaskTemplate& tmpl,
                                        const std::map<std::string, std::string>& fields);

}  // namespace lait
