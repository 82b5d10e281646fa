use super::{Command, Location, WorldSpec, WorldState};

fn with_article(name: &str) -> String {
    let vowel = name
        .chars()
        .next()
        .is_some_and(|c| "aeiouAEIOU".contains(c));
    if vowel {
        format!("an {name}")
    } else {
        format!("a {name}")
    }
}

fn listing(names: &[String]) -> String {
    names
        .iter()
        .map(|n| with_article(n))
        .collect::<Vec<_>>()
        .join(", ")
}

fn label(spec: &WorldSpec, state: &WorldState, id: &str) -> String {
    let obj = spec.object(id).expect("validated object id");
    if obj.openable {
        let status = if spec.is_open(state, obj) { "open" } else { "closed" };
        format!("{} ({status})", obj.name)
    } else {
        obj.name.clone()
    }
}

/// Full observation text: optional action message, then the room view.
pub(super) fn observation(spec: &WorldSpec, state: &WorldState, message: Option<&str>) -> String {
    let room = spec.room(&state.current_room).expect("validated room id");
    let mut lines = Vec::new();
    if let Some(m) = message {
        lines.push(m.to_string());
    }
    lines.push(room.name.clone());
    lines.push(room.description.clone());

    let here: Vec<String> = spec
        .objects
        .iter()
        .filter(|o| state.object_locations.get(&o.id) == Some(&Location::Room(room.id.clone())))
        .map(|o| label(spec, state, &o.id))
        .collect();
    if here.is_empty() {
        lines.push("You see nothing of interest.".into());
    } else {
        lines.push(format!("You see {}.", listing(&here)));
    }

    for container in spec.objects.iter().filter(|o| o.container) {
        if !spec.is_visible(state, &container.id)
            || (container.openable && !spec.is_open(state, container))
        {
            continue;
        }
        let inside: Vec<String> = spec
            .objects
            .iter()
            .filter(|o| {
                state.object_locations.get(&o.id) == Some(&Location::Container(container.id.clone()))
            })
            .map(|o| label(spec, state, &o.id))
            .collect();
        if !inside.is_empty() {
            lines.push(format!("The {} holds {}.", container.name, listing(&inside)));
        }
    }

    if !room.exits.is_empty() {
        let exits: Vec<&str> = room.exits.keys().map(|d| d.name()).collect();
        lines.push(format!("Exits: {}.", exits.join(", ")));
    }

    let carried: Vec<String> = spec
        .objects
        .iter()
        .filter(|o| state.carries(&o.id))
        .map(|o| label(spec, state, &o.id))
        .collect();
    if carried.is_empty() {
        lines.push("You carry nothing.".into());
    } else {
        lines.push(format!("You carry {}.", listing(&carried)));
    }
    lines.join("\n")
}

/// Explanation for a command that had no effect.
pub(super) fn failure(spec: &WorldSpec, state: &WorldState, cmd: &Command) -> String {
    let name = |id: &str| spec.object(id).map(|o| o.name.as_str()).unwrap_or(id).to_string();
    match cmd {
        Command::Move(d) => format!("You can't go {d} from here."),
        Command::Take(o) => {
            if state.carries(o) {
                format!("You already have the {}.", name(o))
            } else if !spec.is_visible(state, o) {
                "You don't see that here.".into()
            } else {
                format!("The {} won't budge.", name(o))
            }
        }
        Command::Drop(_) => "You aren't carrying that.".into(),
        Command::Open(o) => match spec.object(o) {
            _ if !spec.is_visible(state, o) => "You don't see that here.".into(),
            Some(obj) if !obj.openable => format!("The {} can't be opened.", obj.name),
            Some(obj) if spec.is_open(state, obj) => format!("The {} is already open.", obj.name),
            Some(obj) => format!("The {} is locked.", obj.name),
            None => "You don't see that here.".into(),
        },
        Command::Use(..) => "Nothing happens.".into(),
        Command::Look | Command::Inventory => String::new(),
    }
}
