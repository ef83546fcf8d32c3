"""Regenerate the shipped synthetic suite (apps/*.json, tasks/*.json).

Apps are written with readable page names, then renumbered to p0, p1, ... in
exploration order. Tasks are hand-written as label paths from the start page;
the last label is the goal interaction.

    python scripts/make_suite.py [OUT_DIR]
"""

import json
import sys
from pathlib import Path

from graphpilot.app_model import Action, app_from_dict, apply_action, dump_app_spec
from graphpilot.explorer import canonicalize_app
from graphpilot.generator import Goal
from graphpilot.grammar import ActionSequence, Step
from graphpilot.harness import TaskSpec, check_task

B, I, C = "button", "input", "checkbox"

APPS = {
    "clock": ("home", {
        "home": ("Home", [(B, "Clock", "clock")]),
        "clock": ("Clock", [(B, "Stopwatch", "stopwatch"), (B, "Alarm", "alarm")]),
        "stopwatch": ("Stopwatch", [(B, "Start", "stopwatch"), (B, "Back", "clock")]),
        "alarm": ("Alarm", [(B, "Back", "clock")]),
    }),
    "notes": ("home", {
        "home": ("Notes", [(B, "Search", "search"), (B, "New note", "editor"),
                           (B, "Folders", "folders"), (B, "Settings", "settings")]),
        "search": ("Search", [(I, "Search notes", "results"), (B, "Back", "home")]),
        "results": ("Results", [(B, "Open first result", "editor"), (B, "Back", "search")]),
        "editor": ("Editor", [(I, "Note body", "editor"), (B, "Save", "home"), (B, "Share", "share")]),
        "share": ("Share note", [(B, "Email", "share_email"), (B, "Back", "editor")]),
        "share_email": ("Email note", [(I, "Recipient", "share_email"), (B, "Send", "home")]),
        "folders": ("Folders", [(B, "Work", "folder_work"), (B, "Back", "home")]),
        "folder_work": ("Work", [(B, "Add subfolder", "new_folder"), (B, "Back", "folders")]),
        "new_folder": ("New folder", [(I, "Folder name", "new_folder"), (B, "Create", "folder_work")]),
        "settings": ("Settings", [(B, "Theme", "theme"), (B, "Back", "home")]),
        "theme": ("Theme", [(C, "Dark mode", "theme"), (B, "Back", "settings")]),
    }),
    "settings": ("home", {
        "home": ("Settings", [(B, "Network", "network"), (B, "Display", "display"),
                              (B, "Accounts", "accounts"), (B, "About", "about")]),
        "network": ("Network", [(B, "Wi-Fi", "wifi"), (B, "Bluetooth", "bt"), (B, "Back", "home")]),
        "wifi": ("Wi-Fi", [(C, "Wi-Fi enabled", "wifi"), (B, "Saved networks", "saved"),
                           (B, "Back", "network")]),
        "saved": ("Saved networks", [(B, "HomeNet", "homenet"), (B, "Back", "wifi")]),
        "homenet": ("HomeNet", [(B, "Advanced", "advanced"), (B, "Forget", "saved"), (B, "Back", "saved")]),
        "advanced": ("Advanced", [(I, "Proxy host", "advanced"), (C, "Metered", "advanced"),
                                  (B, "Back", "homenet")]),
        "bt": ("Bluetooth", [(C, "Bluetooth enabled", "bt"), (B, "Back", "network")]),
        "display": ("Display", [(B, "Brightness", "brightness"), (C, "Auto-rotate", "display"),
                                (B, "Back", "home")]),
        "brightness": ("Brightness", [(I, "Level", "brightness"), (B, "Back", "display")]),
        "accounts": ("Accounts", [(B, "Add account", "add_account"), (B, "Back", "home")]),
        "add_account": ("Add account", [(I, "Email", "add_account"), (B, "Continue", "account_pw")]),
        "account_pw": ("Password", [(I, "Password", "account_pw"), (B, "Sign in", "accounts")]),
        "about": ("About", [(B, "Legal", "legal"), (B, "Back", "home")]),
        "legal": ("Legal", [(B, "Licenses", "licenses"), (B, "Back", "about")]),
        "licenses": ("Licenses", [(B, "Back", "legal")]),
    }),
    "music": ("home", {
        "home": ("Music", [(B, "Library", "library"), (B, "Search", "search"), (B, "Now playing", "player")]),
        "library": ("Library", [(B, "Playlists", "playlists"), (B, "Albums", "albums"), (B, "Back", "home")]),
        "playlists": ("Playlists", [(B, "Favorites", "favorites"), (B, "New playlist", "new_pl"),
                                    (B, "Back", "library")]),
        "favorites": ("Favorites", [(B, "Shuffle play", "player"), (B, "Back", "playlists")]),
        "player": ("Player", [(B, "Play/Pause", "player"), (B, "Next", "player"), (B, "Queue", "queue"),
                              (B, "Back", "home")]),
        "queue": ("Queue", [(B, "Clear queue", "queue"), (B, "Back", "player")]),
        "new_pl": ("New playlist", [(I, "Playlist name", "new_pl"), (B, "Create", "playlists")]),
        "albums": ("Albums", [(B, "Sort", "sort"), (B, "Back", "library")]),
        "sort": ("Sort albums", [(C, "By artist", "albums"), (C, "By year", "albums")]),
        "search": ("Search", [(I, "Query", "search_results"), (B, "Back", "home")]),
        "search_results": ("Search results", [(B, "Top result", "player"), (B, "Back", "search")]),
    }),
    "contacts": ("home", {
        "home": ("Messages", [(B, "Contacts", "contacts"), (B, "Conversations", "convs"),
                              (B, "Compose", "compose")]),
        "contacts": ("Contacts", [(B, "Alice", "alice"), (B, "Add contact", "add_contact"),
                                  (B, "Back", "home")]),
        "alice": ("Alice", [(B, "Message", "compose"), (B, "Edit", "edit_contact"), (B, "Back", "contacts")]),
        "edit_contact": ("Edit contact", [(I, "Phone", "edit_contact"), (B, "Delete", "confirm_delete"),
                                          (B, "Save", "alice")]),
        "confirm_delete": ("Delete contact?", [(B, "Confirm", "contacts"), (B, "Cancel", "edit_contact")]),
        "add_contact": ("New contact", [(I, "Name", "add_contact"), (B, "Save", "contacts")]),
        "convs": ("Conversations", [(B, "Thread with Bob", "thread"), (B, "Back", "home")]),
        "thread": ("Bob", [(I, "Reply", "thread"), (B, "Attach", "attach"), (B, "Back", "convs")]),
        "attach": ("Attach", [(B, "Photo", "thread"), (B, "Location", "thread")]),
        "compose": ("Compose", [(I, "Recipient", "compose"), (I, "Message", "compose"), (B, "Send", "convs")]),
    }),
}

# (task_id, app, description, [label or (label, payload), ...])
TASKS = [
    ("clock-01", "clock", "start the stopwatch", ["Clock", "Stopwatch", "Start"]),
    ("clock-02", "clock", "open the alarm page", ["Clock", "Alarm"]),
    ("clock-03", "clock", "open the clock tab", ["Clock"]),
    ("clock-04", "clock", "go back from the alarm page to the clock", ["Clock", "Alarm", "Back"]),
    ("notes-01", "notes", "search my notes for groceries", ["Search", ("Search notes", "groceries")]),
    ("notes-02", "notes", "turn on dark mode", ["Settings", "Theme", "Dark mode"]),
    ("notes-03", "notes", "email the note to bob@example.com",
     ["New note", "Share", "Email", ("Recipient", "bob@example.com")]),
    ("notes-04", "notes", "name a new Work subfolder Q3", ["Folders", "Work", "Add subfolder", ("Folder name", "Q3")]),
    ("notes-05", "notes", "send the current note by email", ["New note", "Share", "Email", "Send"]),
    ("settings-01", "settings", "set the HomeNet proxy host to 10.0.0.1",
     ["Network", "Wi-Fi", "Saved networks", "HomeNet", "Advanced", ("Proxy host", "10.0.0.1")]),
    ("settings-02", "settings", "mark HomeNet as a metered network",
     ["Network", "Wi-Fi", "Saved networks", "HomeNet", "Advanced", "Metered"]),
    ("settings-03", "settings", "turn off bluetooth", ["Network", "Bluetooth", "Bluetooth enabled"]),
    ("settings-04", "settings", "enable auto-rotate", ["Display", "Auto-rotate"]),
    ("settings-05", "settings", "forget the HomeNet network", ["Network", "Wi-Fi", "Saved networks", "HomeNet", "Forget"]),
    ("settings-06", "settings", "show the open source licenses", ["About", "Legal", "Licenses"]),
    ("settings-07", "settings", "type hunter2 as the new account password",
     ["Accounts", "Add account", "Continue", ("Password", "hunter2")]),
    ("music-01", "music", "shuffle my favorites", ["Library", "Playlists", "Favorites", "Shuffle play"]),
    ("music-02", "music", "sort albums by year", ["Library", "Albums", "Sort", "By year"]),
    ("music-03", "music", "create a playlist named Road Trip",
     ["Library", "Playlists", "New playlist", ("Playlist name", "Road Trip")]),
    ("music-04", "music", "clear the play queue", ["Now playing", "Queue", "Clear queue"]),
    ("music-05", "music", "search for jazz", ["Search", ("Query", "jazz")]),
    ("music-06", "music", "skip to the next song", ["Now playing", "Next"]),
    ("contacts-01", "contacts", "delete Alice from my contacts", ["Contacts", "Alice", "Edit", "Delete", "Confirm"]),
    ("contacts-02", "contacts", "change Alice's phone number to 555-0100",
     ["Contacts", "Alice", "Edit", ("Phone", "555-0100")]),
    ("contacts-03", "contacts", "reply to Bob saying on my way",
     ["Conversations", "Thread with Bob", ("Reply", "on my way")]),
    ("contacts-04", "contacts", "share my location with Bob", ["Conversations", "Thread with Bob", "Attach", "Location"]),
    ("contacts-05", "contacts", "add a contact named Carol", ["Contacts", "Add contact", ("Name", "Carol")]),
]


def build_app(app_id, start, pages):
    doc = {"app_id": app_id, "start_page": start, "pages": [
        {"page_id": pid, "title": title,
         "elements": [{"element_id": i, "kind": k, "label": label, "target_page": tgt}
                      for i, (k, label, tgt) in enumerate(els, 1)]}
        for pid, (title, els) in pages.items()
    ]}
    return canonicalize_app(app_from_dict(doc))


def build_task(app, task_id, description, path):
    page, steps = app.start_page, []
    for item in path:
        label, payload = item if isinstance(item, tuple) else (item, None)
        matches = [e for e in app.page(page).elements if e.label == label]
        if len(matches) != 1:
            raise SystemExit(f"{task_id}: label {label!r} not unique on {page}")
        el = matches[0]
        action = Action.text(el.element_id, payload) if el.kind == "input" else Action.click(el.element_id)
        nxt = apply_action(app, page, action)
        steps.append(Step(page, action, nxt))
        goal = Goal(page, el.element_id, payload)
        page = nxt
    steps.append(Step(page, Action.stop(), page))
    task = TaskSpec(task_id, app.app_id, description, goal, ActionSequence(tuple(steps)))
    assert not check_task(app, task), check_task(app, task)
    return task


def main(out_dir):
    out = Path(out_dir)
    (out / "apps").mkdir(parents=True, exist_ok=True)
    (out / "tasks").mkdir(parents=True, exist_ok=True)
    apps = {}
    for app_id, (start, pages) in APPS.items():
        apps[app_id] = build_app(app_id, start, pages)
        (out / "apps" / f"{app_id}.json").write_text(dump_app_spec(apps[app_id]), encoding="utf-8")
    for task_id, app_id, desc, path in TASKS:
        task = build_task(apps[app_id], task_id, desc, path)
        (out / "tasks" / f"{task_id}.json").write_text(
            json.dumps(task.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    lengths = [len(build_task(apps[a], t, d, p).ground_truth) for t, a, d, p in TASKS]
    print(f"{len(apps)} apps, {len(TASKS)} tasks, ground-truth lengths {min(lengths)}-{max(lengths)}, "
          f"mean {sum(lengths) / len(lengths):.2f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/graphpilot/data/suite")
