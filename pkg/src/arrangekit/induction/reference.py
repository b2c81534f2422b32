"""Built-in reference arrangement program for the dining-table family.

The program is written in the same restricted form that induced programs
use, so it runs in the embedded interpreter with call_LLM answering the
semantic queries (diner count, seating wishes, role matching, ...).
"""

from __future__ import annotations

import textwrap

from ..errors import ValidationError
from .interp import Program, parse_function

MAIN_NAME = "generate_object_arrangements_for_dining_table"

_SOURCES: dict[str, str] = {}

_SOURCES["create_data_structures"] = '''
def create_data_structures(num_diners):
    """Create the storage structures for intermediate results: a diner
    dictionary indexed by diner id whose records track id, special
    requirement (default none), tableware arrangement style, seating
    position (edge, column) and the assigned objects plus proposed
    relations; shared-object groups are stored in a second dictionary
    created later from the identified categories."""
    diners = {}
    for i in range(1, num_diners + 1):
        diner_id = "diner_" + str(i)
        diners[diner_id] = {
            "id": diner_id,
            "special_requirement": "none",
            "style": "",
            "seating_position": ["near-front-edge", "central-column"],
            "object_list": [],
            "active_relations": [],
        }
    return {"diners": diners, "sharing": {}}
'''

_SOURCES["infer_number_of_diners"] = '''
def infer_number_of_diners(instruction):
    """Work out how many people are dining, which fixes how many place
    settings are needed. The count is inferred from the instruction with a
    language-model query returning an integer."""
    answer = call_LLM(
        "How many people are dining according to the instruction?",
        "Instruction: " + instruction + " A personal setup such as 'set up a table for me' means 1 diner; 'for two people' means 2.",
        "a single integer",
    )
    return int(answer)
'''

_SOURCES["assign_seating_positions"] = '''
def assign_seating_positions(instruction, diners):
    """Give every diner a seating position (edge, column). The table has a
    front and a back edge and three seats per edge (left, center, right).
    First infer whether the diners sit on the same side or on opposite
    sides (default opposite; same side puts everyone at the front edge),
    then apply stated seat preferences, otherwise spread the diners evenly
    over each edge."""
    ids = sorted(diners.keys())
    side = call_LLM(
        "Do the diners want to sit on the same side of the table or on opposite sides?",
        "Instruction: " + instruction + " Answer 'same' when the diners ask to sit side by side or on the same side; the default is 'opposite'.",
        "one word: same or opposite",
    )
    edges = []
    for i in range(len(ids)):
        if side == "same":
            edges.append("near-front-edge")
        elif i % 2 == 0:
            edges.append("near-front-edge")
        else:
            edges.append("near-back-edge")
    prefs = call_LLM(
        "For each of the " + str(len(ids)) + " diners, does the instruction state a preferred seating area on their table side?",
        "Instruction: " + instruction + " Use 'none' when no preference is stated.",
        "JSON list of " + str(len(ids)) + " words, each one of: left, center, right, none",
    )
    columns = {"left": "left-half", "center": "central-column", "right": "right-half"}
    spread = {
        1: ["central-column"],
        2: ["left-half", "right-half"],
        3: ["left-half", "central-column", "right-half"],
    }
    edge_groups = {}
    for i in range(len(ids)):
        if edges[i] not in edge_groups:
            edge_groups[edges[i]] = []
        edge_groups[edges[i]].append(i)
    cycle = ["left-half", "central-column", "right-half"]
    for edge in sorted(edge_groups.keys()):
        group = edge_groups[edge]
        defaults = spread.get(len(group), [])
        for j, i in enumerate(group):
            pref = prefs[i] if i < len(prefs) else "none"
            if pref in columns:
                column = columns[pref]
            elif j < len(defaults):
                column = defaults[j]
            else:
                column = cycle[j % 3]
            diners[ids[i]]["seating_position"] = [edge, column]
    return diners
'''

_SOURCES["identify_special_requirements"] = '''
def identify_special_requirements(instruction, diners):
    """Check whether any diner has special requirements (for example being
    left-handed or a child that needs help) and store the inferred
    requirement string on each diner record; the default is none."""
    ids = sorted(diners.keys())
    answers = call_LLM(
        "For each of the " + str(len(ids)) + " diners, what special requirement does the instruction state?",
        "Instruction: " + instruction + " Typical requirements: left-handed, child. Use 'none' for diners without special requirements.",
        "JSON list of " + str(len(ids)) + " short strings",
    )
    for i in range(len(ids)):
        if i < len(answers):
            diners[ids[i]]["special_requirement"] = str(answers[i])
    return diners
'''

_SOURCES["identify_dining_style"] = '''
def identify_dining_style(instruction, diners):
    """Identify the dining style used for the individual tableware
    arrangements (for example western, chinese or ramen) as a single
    string inferred from the instruction, and assign it to every diner."""
    style = call_LLM(
        "Which dining style should be used for the individual tableware arrangements?",
        "Instruction: " + instruction + " Typical answers: western dining, chinese dining, ramen dining.",
        "a short style name",
    )
    for diner_id in sorted(diners.keys()):
        diners[diner_id]["style"] = str(style)
    return diners
'''

_SOURCES["identify_shared_categories"] = '''
def identify_shared_categories(instruction, object_list):
    """Identify which shared-object categories occur in the scene. There
    are two possible categories: shared_dishes for main dishes shared by
    all diners and shared_side_objects for items like condiments or
    drinks. Returns the sharing dictionary keyed by category name with
    empty group records as values."""
    categories = call_LLM(
        "Which shared-object categories appear among these objects: shared_dishes (main dishes shared by everyone) or shared_side_objects (condiments, seasonings or drinks kept on the side)?",
        "Instruction: " + instruction + " Objects: " + ", ".join(sorted(object_list)) + ". Answer only with the applicable category names; the list may be empty.",
        "JSON list of category names",
    )
    sharing = {}
    for category in categories:
        sharing[str(category)] = {"object_list": [], "active_relations": []}
    return sharing
'''

_SOURCES["assign_personal_tableware"] = '''
def assign_personal_tableware(instruction, object_list, diners):
    """Select the objects intended for individual use (each diner's main
    serving tableware and utensils), then give every diner their subset,
    guided by the diner's special requirement and the numbering convention
    that objects sharing a numeric suffix belong to the same diner.
    Returns the list of all individually used objects."""
    ids = sorted(diners.keys())
    style = diners[ids[0]]["style"]
    individual = call_LLM(
        "Which of these objects are personal tableware intended for individual use by a single diner?",
        "Objects: " + ", ".join(object_list) + ". Number of diners: " + str(len(ids)) + ". Dining style: " + style + ". Include each diner's main serving tableware and utensils; exclude shared dishes and shared side items.",
        "JSON list of object names",
    )
    individual_names = []
    for name in individual:
        individual_names.append(str(name))
    for i in range(len(ids)):
        subset = call_LLM(
            "Which of the individual objects belong to diner " + str(i + 1) + " of " + str(len(ids)) + "?",
            "Individual objects: " + ", ".join(individual_names) + ". Special requirement of this diner: " + diners[ids[i]]["special_requirement"] + ". Objects numbered with the same suffix belong to the same diner; unnumbered objects belong to diner 1.",
            "JSON list of object names",
        )
        cleaned = []
        for name in subset:
            if name in individual_names:
                cleaned.append(str(name))
        diners[ids[i]]["object_list"] = cleaned
    return individual_names
'''

_SOURCES["assign_shared_items"] = '''
def assign_shared_items(object_list, individual_objects, sharing):
    """Collect the objects that are not individual tableware and assign
    them to the identified shared categories, one language-model query per
    category."""
    shared = []
    for name in object_list:
        if name not in individual_objects:
            shared.append(name)
    for category in sorted(sharing.keys()):
        if len(shared) == 0:
            sharing[category]["object_list"] = []
            continue
        subset = call_LLM(
            "Which of these shared objects belong to the category '" + category + "'?",
            "Shared objects: " + ", ".join(shared) + ".",
            "JSON list of object names",
        )
        cleaned = []
        for name in subset:
            if name in shared:
                cleaned.append(str(name))
        sharing[category]["object_list"] = cleaned
    return sharing
'''

_SOURCES["western_dining_arrangement"] = '''
def western_dining_arrangement(object_list, seating_position, personal_preference):
    """Arrange western-style tableware for one diner. The standard setup
    for a right-handed diner: the serving plate anchors at the seating
    position; the napkin goes left of the plate with the fork on top of
    the napkin; knife, spoon and glass line up to the right of the plate
    in that order. Objects that match no standard item are placed by an
    on-the-fly query. If the diner is left-handed xor seated at the back
    edge, the left/right relations are reversed."""
    if len(object_list) == 0:
        return []
    roles = call_LLM(
        "Match each object name to the standard western tableware item it serves as: serving_plate, napkin, fork, knife, spoon or glass.",
        "Objects: " + ", ".join(object_list) + ". Use 'other' for objects that match no standard item.",
        "JSON object mapping every object name to its item name or 'other'",
    )
    by_role = {}
    extras = []
    for name in object_list:
        role = roles.get(name, "other")
        if role == "other" or role in by_role:
            extras.append(name)
        else:
            by_role[role] = name
    anchor = by_role.get("serving_plate", object_list[0])
    relations = [[seating_position[1], anchor], [seating_position[0], anchor]]
    napkin = by_role.get("napkin")
    if napkin is not None:
        relations.append(["left-of", napkin, anchor])
    fork = by_role.get("fork")
    if fork is not None:
        if napkin is not None:
            relations.append(["on-top-of", fork, napkin])
        else:
            relations.append(["left-of", fork, anchor])
    tail = anchor
    for role in ["knife", "spoon", "glass"]:
        item = by_role.get(role)
        if item is not None:
            relations.append(["right-of", item, tail])
            tail = item
    if len(extras) > 0:
        proposed = call_LLM(
            "Propose abstract relations that place these remaining objects into the western dining setup of one diner.",
            "Remaining objects: " + ", ".join(extras) + ". Already arranged: " + str(relations) + ". Allowed relation names: left-of, right-of, in-front-of, on-top-of, centered, horizontally-aligned-centroid, vertically-aligned-centroid.",
            "JSON list of relations, each a list of the relation name followed by object names",
        )
        for relation in proposed:
            relations.append(list(relation))
    left_handed = "left" in str(personal_preference).lower()
    facing_back = seating_position[0] == "near-back-edge"
    if left_handed != facing_back:
        swap = {"left-of": "right-of", "right-of": "left-of", "left-touching": "right-touching", "right-touching": "left-touching"}
        mirrored = []
        for relation in relations:
            if relation[0] in swap:
                mirrored.append([swap[relation[0]]] + list(relation[1:]))
            else:
                mirrored.append(relation)
        relations = mirrored
    return relations
'''

_SOURCES["chinese_dining_arrangement"] = '''
def chinese_dining_arrangement(object_list, seating_position, personal_preference):
    """Arrange chinese-style tableware for one diner. The standard setup
    for a right-handed diner: the small plate anchors at the seating
    position with the rice bowl on top of it; chopsticks, spoon and glass
    line up left to right on the right-hand side of the plate. Unmatched
    objects are placed by an on-the-fly query. If the diner is left-handed
    xor seated at the back edge, the left/right relations are reversed."""
    if len(object_list) == 0:
        return []
    roles = call_LLM(
        "Match each object name to the standard chinese tableware item it serves as: small_plate, rice_bowl, chopsticks, spoon or glass.",
        "Objects: " + ", ".join(object_list) + ". Use 'other' for objects that match no standard item.",
        "JSON object mapping every object name to its item name or 'other'",
    )
    by_role = {}
    extras = []
    for name in object_list:
        role = roles.get(name, "other")
        if role == "other" or role in by_role:
            extras.append(name)
        else:
            by_role[role] = name
    anchor = by_role.get("small_plate", object_list[0])
    relations = [[seating_position[1], anchor], [seating_position[0], anchor]]
    bowl = by_role.get("rice_bowl")
    if bowl is not None:
        relations.append(["on-top-of", bowl, anchor])
    tail = anchor
    for role in ["chopsticks", "spoon", "glass"]:
        item = by_role.get(role)
        if item is not None:
            relations.append(["right-of", item, tail])
            tail = item
    if len(extras) > 0:
        proposed = call_LLM(
            "Propose abstract relations that place these remaining objects into the chinese dining setup of one diner.",
            "Remaining objects: " + ", ".join(extras) + ". Already arranged: " + str(relations) + ". Allowed relation names: left-of, right-of, in-front-of, on-top-of, centered, horizontally-aligned-centroid, vertically-aligned-centroid.",
            "JSON list of relations, each a list of the relation name followed by object names",
        )
        for relation in proposed:
            relations.append(list(relation))
    left_handed = "left" in str(personal_preference).lower()
    facing_back = seating_position[0] == "near-back-edge"
    if left_handed != facing_back:
        swap = {"left-of": "right-of", "right-of": "left-of", "left-touching": "right-touching", "right-touching": "left-touching"}
        mirrored = []
        for relation in relations:
            if relation[0] in swap:
                mirrored.append([swap[relation[0]]] + list(relation[1:]))
            else:
                mirrored.append(relation)
        relations = mirrored
    return relations
'''

_SOURCES["ramen_dining_arrangement"] = '''
def ramen_dining_arrangement(object_list, seating_position, personal_preference):
    """Arrange ramen-style tableware for one diner. The standard setup for
    a right-handed diner: the ramen bowl anchors at the seating position;
    chopsticks, spoon and glass line up to the right of the bowl in that
    order. Unmatched objects are placed by an on-the-fly query. If the
    diner is left-handed xor seated at the back edge, the left/right
    relations are reversed."""
    if len(object_list) == 0:
        return []
    roles = call_LLM(
        "Match each object name to the standard ramen tableware item it serves as: ramen_bowl, chopsticks, spoon or glass.",
        "Objects: " + ", ".join(object_list) + ". Use 'other' for objects that match no standard item.",
        "JSON object mapping every object name to its item name or 'other'",
    )
    by_role = {}
    extras = []
    for name in object_list:
        role = roles.get(name, "other")
        if role == "other" or role in by_role:
            extras.append(name)
        else:
            by_role[role] = name
    anchor = by_role.get("ramen_bowl", object_list[0])
    relations = [[seating_position[1], anchor], [seating_position[0], anchor]]
    tail = anchor
    for role in ["chopsticks", "spoon", "glass"]:
        item = by_role.get(role)
        if item is not None:
            relations.append(["right-of", item, tail])
            tail = item
    if len(extras) > 0:
        proposed = call_LLM(
            "Propose abstract relations that place these remaining objects into the ramen dining setup of one diner.",
            "Remaining objects: " + ", ".join(extras) + ". Already arranged: " + str(relations) + ". Allowed relation names: left-of, right-of, in-front-of, on-top-of, centered, horizontally-aligned-centroid, vertically-aligned-centroid.",
            "JSON list of relations, each a list of the relation name followed by object names",
        )
        for relation in proposed:
            relations.append(list(relation))
    left_handed = "left" in str(personal_preference).lower()
    facing_back = seating_position[0] == "near-back-edge"
    if left_handed != facing_back:
        swap = {"left-of": "right-of", "right-of": "left-of", "left-touching": "right-touching", "right-touching": "left-touching"}
        mirrored = []
        for relation in relations:
            if relation[0] in swap:
                mirrored.append([swap[relation[0]]] + list(relation[1:]))
            else:
                mirrored.append(relation)
        relations = mirrored
    return relations
'''

_SOURCES["other_dining_arrangement"] = '''
def other_dining_arrangement(style, object_list, seating_position, personal_preference):
    """Arrange tableware for a dining style without a fixed pattern.
    Identify the main dish container for the style, anchor it at the
    seating position, then query for relations placing the remaining
    objects relative to it following the conventions of a right-handed
    diner. If the diner is left-handed xor seated at the back edge, the
    left/right relations are reversed."""
    if len(object_list) == 0:
        return []
    anchor = call_LLM(
        "Identify the main dish container for this dining style.",
        "Dining style: " + style + ". Objects: " + ", ".join(object_list) + ". For example the serving plate is the main dish container of a western setup.",
        "one object name from the list",
    )
    if anchor not in object_list:
        anchor = object_list[0]
    relations = [[seating_position[1], anchor], [seating_position[0], anchor]]
    others = []
    for name in object_list:
        if name != anchor:
            others.append(name)
    if len(others) > 0:
        proposed = call_LLM(
            "Propose abstract relations placing these objects around the main dish container for a right-handed diner.",
            "Dining style: " + style + ". Main dish container: " + anchor + ". Objects: " + ", ".join(others) + ". Allowed relation names: left-of, right-of, in-front-of, on-top-of, centered, horizontally-aligned-centroid, vertically-aligned-centroid.",
            "JSON list of relations, each a list of the relation name followed by object names",
        )
        for relation in proposed:
            relations.append(list(relation))
    left_handed = "left" in str(personal_preference).lower()
    facing_back = seating_position[0] == "near-back-edge"
    if left_handed != facing_back:
        swap = {"left-of": "right-of", "right-of": "left-of", "left-touching": "right-touching", "right-touching": "left-touching"}
        mirrored = []
        for relation in relations:
            if relation[0] in swap:
                mirrored.append([swap[relation[0]]] + list(relation[1:]))
            else:
                mirrored.append(relation)
        relations = mirrored
    return relations
'''

_SOURCES["shared_dishes_arrangement"] = '''
def shared_dishes_arrangement(object_list):
    """Arrange shared dishes neatly and centrally for easy access by all
    diners: one dish sits at the table center; two dishes mirror each
    other across the table's vertical axis on the central row; three or
    four dishes form one horizontal line on the central row; more than
    four form a regular grid."""
    items = sorted(object_list)
    relations = []
    if len(items) == 0:
        return relations
    if len(items) == 1:
        relations.append(["at-center", items[0]])
        return relations
    if len(items) == 2:
        relations.append(["vertical-symmetry-on-table", items[0], items[1]])
        relations.append(["central-row", items[0]])
        relations.append(["central-row", items[1]])
        return relations
    if len(items) <= 4:
        relations.append(["aligned-in-horizontal-line-centroid"] + items)
        for name in items:
            relations.append(["central-row", name])
        return relations
    relations.append(["regular-grid"] + items)
    return relations
'''

_SOURCES["shared_side_objects_arrangement"] = '''
def shared_side_objects_arrangement(object_list):
    """Arrange shared side items (seasonings, bottles) for easy access and
    a neat look: align them vertically, keep each on the central row, and
    place each near the chosen left or right table edge (default right)."""
    items = sorted(object_list)
    relations = []
    if len(items) == 0:
        return relations
    edge = call_LLM(
        "Should the shared side items go near the left or the right edge of the table?",
        "Side items: " + ", ".join(items) + ". Choose one edge so the items stay out of the way; the default is right.",
        "one word: left or right",
    )
    edge_relation = "near-right-edge"
    if edge == "left":
        edge_relation = "near-left-edge"
    if len(items) >= 2:
        relations.append(["aligned-in-vertical-line-centroid"] + items)
    for name in items:
        relations.append(["central-row", name])
        relations.append([edge_relation, name])
    return relations
'''

_SOURCES["arrange_personal_tableware"] = '''
def arrange_personal_tableware(diners):
    """Propose the arrangement for each diner by dispatching to the
    pattern matching their arrangement style and storing the returned
    relations on the diner record."""
    for diner_id in sorted(diners.keys()):
        diner = diners[diner_id]
        style = diner["style"].lower()
        if "western" in style:
            relations = western_dining_arrangement(diner["object_list"], diner["seating_position"], diner["special_requirement"])
        elif "chinese" in style:
            relations = chinese_dining_arrangement(diner["object_list"], diner["seating_position"], diner["special_requirement"])
        elif "ramen" in style:
            relations = ramen_dining_arrangement(diner["object_list"], diner["seating_position"], diner["special_requirement"])
        else:
            relations = other_dining_arrangement(diner["style"], diner["object_list"], diner["seating_position"], diner["special_requirement"])
        diner["active_relations"] = relations
    return diners
'''

_SOURCES["arrange_sharing_objects"] = '''
def arrange_sharing_objects(sharing):
    """Propose the arrangement for each shared-object group by category:
    dish-like categories use the shared-dishes pattern, side-item
    categories the shared-side-items pattern."""
    for category in sorted(sharing.keys()):
        group = sharing[category]
        if "dish" in category:
            group["active_relations"] = shared_dishes_arrangement(group["object_list"])
        else:
            group["active_relations"] = shared_side_objects_arrangement(group["object_list"])
    return sharing
'''

_SOURCES[MAIN_NAME] = '''
def generate_object_arrangements_for_dining_table(instruction, object_list):
    """Generate the list of abstract relations for a dining-table
    instruction: extract the relevant information (diner count, seating,
    special requirements), identify the dining style and shared
    categories, split the objects into per-diner and shared groups, then
    arrange every group and concatenate the proposed relations."""
    num_diners = infer_number_of_diners(instruction)
    data = create_data_structures(num_diners)
    diners = data["diners"]
    assign_seating_positions(instruction, diners)
    identify_special_requirements(instruction, diners)
    identify_dining_style(instruction, diners)
    sharing = identify_shared_categories(instruction, object_list)
    individual_objects = assign_personal_tableware(instruction, object_list, diners)
    assign_shared_items(object_list, individual_objects, sharing)
    arrange_personal_tableware(diners)
    arrange_sharing_objects(sharing)
    active_relation_list = []
    for diner_id in sorted(diners.keys()):
        for relation in diners[diner_id]["active_relations"]:
            active_relation_list.append(relation)
    for category in sorted(sharing.keys()):
        for relation in sharing[category]["active_relations"]:
            active_relation_list.append(relation)
    return active_relation_list
'''


def reference_sources(family: str = "dining") -> dict[str, str]:
    if family != "dining":
        raise ValidationError(f"unsupported program family {family!r}")
    return {name: textwrap.dedent(src).strip() + "\n" for name, src in _SOURCES.items()}


def reference_program(family: str = "dining") -> Program:
    sources = reference_sources(family)
    functions = {name: parse_function(src) for name, src in sources.items()}
    return Program(functions=functions, main=MAIN_NAME, family=family)
