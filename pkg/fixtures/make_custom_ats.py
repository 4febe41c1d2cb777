"""One-off generator for the two hand-modelled campaign fixtures.

Run from the repository root:  python3 fixtures/make_custom_ats.py
Kept in the repo so the fixture encoding stays reproducible; the JSON
files it writes are committed alongside it.
"""

from __future__ import annotations

from attackquant.atfile import AtDocument, write_at
from attackquant.tree import AttackTree, GateType, Node

OR, AND, SAND, BAS = GateType.OR, GateType.AND, GateType.SAND, GateType.BAS


def build(spec: dict, root: str, leaves: dict) -> AtDocument:
    nodes = []
    for nid, (gate, children, label) in spec.items():
        nodes.append(Node(nid, gate, tuple(children), label))
    for nid, (label, prob, tactic, technique) in leaves.items():
        nodes.append(Node(nid, BAS, (), label, tactic, technique))
    tree = AttackTree(nodes, root)
    violations = tree.validate()
    if violations:
        raise SystemExit(f"fixture invalid: {violations}")
    return AtDocument(tree, {nid: (v[1], v[1]) for nid, v in leaves.items()})


WOCAO_GATES = {
    "SCE": (SAND, ["PnA", "EPr", "SnM", "CnE"], "Success in Cyber Espionage"),
    "PnA": (SAND, ["GVI", "RD", "InA", "Dis"], "Prepare and Access"),
    "EPr": (SAND, ["Exe", "Per"], "Establish Presence"),
    "SnM": (SAND, ["Lat", "Esc"], "Spread and Maintain"),
    "CnE": (SAND, ["Coll", "C2", "Exf"], "Collect and Exfiltrate"),
    "RD": (AND, ["GT", "BS", "PCW", "RRE"], "Resource Development"),
    "InA": (OR, ["EVJ", "VPN"], "Initial Access"),
    "EVJ": (OR, ["CVE1", "CVE2"], "Exploit vulnerable JBoss server"),
    "VPN": (AND, ["GVC", "CVP"], "Enter through VPN"),
    "Dis": (AND, ["LoD", "ReD"], "Discovery"),
    "LoD": (AND, ["Sys", "GeP", "GRD", "FOP", "FnD", "GND", "GPS", "CIC",
                  "INe", "GST", "OUD", "LGAd", "DSS"], "Local discovery"),
    "ReD": (AND, ["FRS", "GOS", "GOp", "SeB"], "Remote discovery"),
    "Exe": (AND, ["UPo", "PyB", "VBS", "WCS", "API", "ExT", "EvS", "WMI",
                  "CreDef"], "Execution"),
    "Per": (AND, ["PRS", "PvS", "PvW", "PerAcc", "CreDef"], "Persistence"),
    "PerAcc": (OR, ["PDo", "PLO"], "Persist via accounts"),
    "Lat": (AND, ["LTT", "SMW", "CreDef"], "Lateral Movement"),
    "Esc": (AND, ["Pin", "Sch", "EscAcc", "CreDef"], "Privilege Escalation"),
    "EscAcc": (OR, ["ESD", "ESL"], "Escalate via accounts"),
    "Coll": (AND, ["Aut", "Clip", "CFD", "SAR", "CreDef"], "Collection"),
    "SAR": (AND, ["Tem", "Arch"], "Stage and archive"),
    "C2": (AND, ["XSe", "EnIP", "TLS", "DAF", "CC2", "Bac", "Route"],
           "Command and Control"),
    "Route": (OR, ["Inf", "Tor"], "Proxy route"),
    "CreDef": (AND, ["Cre", "Def"], "Credentials and evasion"),
    "Cre": (AND, ["PwG", "AcM", "Col"], "Credential Access"),
    "PwG": (OR, ["Bru", "Get"], "Obtain passwords"),
    "AcM": (AND, ["InK", "MPw"], "Access password manager"),
    "MPw": (OR, ["BrF", "UTy"], "Master password"),
    "Col": (AND, ["Dum", "Key", "TFA"], "Collect credentials"),
    "Dum": (OR, ["Mim", "Pro"], "Dump credentials from memory"),
    "Def": (AND, ["Fir", "Clean", "MLe", "EnW", "EnC", "EdV", "EvPI",
                  "DefAcc"], "Defense Evasion"),
    "Clean": (OR, ["Cle", "DeT"], "Cover tracks"),
    "DefAcc": (OR, ["UDA", "ULA"], "Blend in via accounts"),
}

W = {
    "GVI": ("Gather victim info", 0.6, "reconnaissance", "T1591"),
    "GT": ("Get tools", 0.8, "resource-development", None),
    "BS": ("Buy server with bitcoin", 0.7, "resource-development", None),
    "PCW": ("Prepare custom webshell", 0.6, "resource-development", None),
    "RRE": ("Register rogue email address", 0.8, "resource-development", None),
    "CVE1": ("Exploit CVE-2010-0738", 0.97, "initial-access", "T1190"),
    "CVE2": ("Exploit CVE-2017-12149", 0.27, "initial-access", "T1190"),
    "GVC": ("Get valid VPN credentials", 0.35, "initial-access", "T1078"),
    "CVP": ("Connect to VPN", 0.8, "initial-access", None),
    "Sys": ("System info discovery", 0.7, "discovery", "T1082"),
    "GeP": ("Get processes", 0.7, "discovery", "T1057"),
    "GRD": ("Get remote desktop info", 0.6, "discovery", None),
    "FOP": ("Find open ports", 0.7, "discovery", None),
    "FnD": ("Files and directories", 0.7, "discovery", "T1083"),
    "GND": ("Get network config", 0.6, "discovery", "T1016"),
    "GPS": ("Get PuTTY sessions", 0.4, "discovery", None),
    "CIC": ("Check internet connection", 0.8, "discovery", "T1016.001"),
    "INe": ("Identify network shares", 0.6, "discovery", "T1135"),
    "GST": ("Get security tooling", 0.5, "discovery", "T1518.001"),
    "OUD": ("OS and user discovery", 0.7, "discovery", "T1033"),
    "LGAd": ("List group admins", 0.5, "discovery", "T1069"),
    "DSS": ("Discover security software", 0.5, "discovery", "T1518.001"),
    "FRS": ("Find reachable systems", 0.6, "discovery", "T1018"),
    "GOS": ("Get OS of connected systems", 0.6, "discovery", None),
    "GOp": ("Get open connections", 0.6, "discovery", "T1049"),
    "SeB": ("Search backdoors", 0.4, "discovery", None),
    "UPo": ("Use PowerShell", 0.7, "execution", "T1059.001"),
    "PyB": ("Python-based tooling", 0.5, "execution", "T1059.006"),
    "VBS": ("VBScript execution", 0.5, "execution", "T1059.005"),
    "WCS": ("Webshell command execution", 0.6, "execution", "T1505.003"),
    "API": ("Native API calls", 0.6, "execution", "T1106"),
    "ExT": ("Execute via scheduled task", 0.6, "execution", "T1053.005"),
    "EvS": ("Execute via service", 0.5, "execution", "T1569.002"),
    "WMI": ("WMI execution", 0.5, "execution", "T1047"),
    "PRS": ("Persist via registry keys", 0.5, "persistence", "T1547.001"),
    "PvS": ("Persist via services", 0.5, "persistence", "T1543.003"),
    "PvW": ("Persist via webshell", 0.6, "persistence", "T1505.003"),
    "PDo": ("Persist via domain accounts", 0.4, "persistence", "T1078.002"),
    "PLO": ("Persist via local accounts", 0.5, "persistence", "T1078.003"),
    "LTT": ("Lateral tool transfer", 0.6, "lateral-movement", "T1570"),
    "SMW": ("SMB and Windows shares", 0.5, "lateral-movement", "T1021.002"),
    "Pin": ("Process injection", 0.5, "privilege-escalation", "T1055"),
    "Sch": ("Scheduled task escalation", 0.5, "privilege-escalation", "T1053.005"),
    "ESD": ("Escalate via domain accounts", 0.4, "privilege-escalation", "T1078.002"),
    "ESL": ("Escalate via local accounts", 0.5, "privilege-escalation", "T1078.003"),
    "Aut": ("Automated collection", 0.5, "collection", "T1119"),
    "Clip": ("Clipboard capture", 0.4, "collection", "T1115"),
    "CFD": ("Collect files and data", 0.7, "collection", "T1005"),
    "Tem": ("Stage in temp directories", 0.7, "collection", "T1074.001"),
    "Arch": ("Archive with WinRAR", 0.7, "collection", "T1560.001"),
    "XSe": ("XServer backdoor channel", 0.5, "command-and-control", None),
    "EnIP": ("Encode IP in traffic", 0.5, "command-and-control", "T1132"),
    "TLS": ("TLS-wrapped channel", 0.6, "command-and-control", "T1573.002"),
    "DAF": ("Data above firewall limits", 0.4, "command-and-control", None),
    "CC2": ("Custom C2 protocol", 0.5, "command-and-control", "T1095"),
    "Bac": ("Backdoor beaconing", 0.5, "command-and-control", None),
    "Inf": ("Internal proxy via infected hosts", 0.5, "command-and-control", "T1090.001"),
    "Tor": ("Route through Tor", 0.6, "command-and-control", "T1090.003"),
    "Exf": ("Exfiltrate over C2 channel", 0.7, "exfiltration", "T1041"),
    "Bru": ("Bruteforce passwords", 0.4, "credential-access", "T1110"),
    "Get": ("Get passwords with PowerSploit", 0.5, "credential-access", "T1555"),
    "InK": ("Install keylogger", 0.5, "credential-access", "T1056.001"),
    "BrF": ("Bruteforce offline vault", 0.35, "credential-access", "T1110.002"),
    "UTy": ("User types master password", 0.85, "credential-access", "T1056.001"),
    "Dum": None,  # gate, listed here only to keep the table aligned
    "Mim": ("Dump with Mimikatz", 0.5, "credential-access", "T1003.001"),
    "Pro": ("Dump with ProcDump", 0.5, "credential-access", "T1003.001"),
    "Key": ("Keylogged credentials", 0.5, "credential-access", "T1056.001"),
    "TFA": ("Intercept 2FA soft tokens", 0.3, "credential-access", "T1111"),
    "Fir": ("Modify system firewall", 0.4, "defense-evasion", "T1562.004"),
    "Cle": ("Clean event logs", 0.5, "defense-evasion", "T1070.001"),
    "DeT": ("Delete tool traces", 0.6, "defense-evasion", "T1070.004"),
    "MLe": ("Masquerade as legit process", 0.5, "defense-evasion", "T1036"),
    "EnW": ("Encode webshell traffic", 0.5, "defense-evasion", "T1132"),
    "EnC": ("Encrypt C2 payloads", 0.5, "defense-evasion", "T1027"),
    "EdV": ("Evade disk forensics", 0.4, "defense-evasion", None),
    "EvPI": ("Evade via process injection", 0.5, "defense-evasion", "T1055"),
    "UDA": ("Use domain accounts", 0.4, "defense-evasion", "T1078.002"),
    "ULA": ("Use local accounts", 0.5, "defense-evasion", "T1078.003"),
}
WOCAO_LEAVES = {k: v for k, v in W.items() if v is not None}

DREAMJOB_GATES = {
    "SCE": (SAND, ["PnA", "EPr", "SnM", "CnE"], "Success in Cyber Espionage"),
    "PnA": (SAND, ["Reco", "RD", "InA"], "Prepare and Access"),
    "EPr": (SAND, ["Exe", "Per"], "Establish Presence"),
    "SnM": (SAND, ["Dis", "Lat", "Esc", "Cre", "Def"], "Spread and Maintain"),
    "CnE": (SAND, ["Coll", "C2", "Exf"], "Collect and Exfiltrate"),
    "Reco": (AND, ["GVI"], "Reconnaissance"),
    "GVI": (OR, ["IRo", "SoMe"], "Gather victim info"),
    "RD": (AND, ["GT", "BS", "PCT", "RRE", "RSD", "HoS", "SoM", "SiC", "SMU"],
           "Resource Development"),
    "HoS": (AND, ["Compr", "HoM", "HoT"], "Hosting services"),
    "Compr": (OR, ["CoD", "CoS"], "Compromise infrastructure"),
    "InA": (OR, ["SpA", "SpL", "SpS"], "Initial Access"),
    "Exe": (AND, ["WCS", "WMI", "VBS", "UPo", "API", "ExT", "Deliver"],
            "Execution"),
    "Deliver": (OR, ["EMF", "EML"], "Victim executes payload"),
    "Per": (AND, ["PvS", "PvT", "IIS"], "Persistence"),
    "Dis": (AND, ["FnD", "GDA", "SCH"], "Discovery"),
    "SCH": (AND, ["DDB", "DLa", "DSa"], "System checks"),
    "Lat": (AND, ["ISp"], "Lateral Movement"),
    "Esc": (AND, ["SFO", "EsT"], "Privilege Escalation"),
    "Cre": (AND, ["Bru"], "Credential Access"),
    "Def": (AND, ["DbE", "Imp", "FDel", "FTM", "SwP", "CdS", "Reg32", "XSL",
                  "RunD", "TInj", "EvSb", "TbE"], "Defense Evasion"),
    "Coll": (AND, ["ArU", "DLS"], "Collection"),
    "C2": (AND, ["WebP", "SymC", "MMI"], "Command and Control"),
    "Exf": (OR, ["ExC2", "ExCl"], "Exfiltration"),
}

DREAMJOB_LEAVES = {
    "IRo": ("Identify roles of employees", 0.7, "reconnaissance", "T1591.004"),
    "SoMe": ("Recon over social media", 0.7, "reconnaissance", "T1593.001"),
    "GT": ("Get tools", 0.8, "resource-development", None),
    "BS": ("Buy servers", 0.7, "resource-development", "T1583.004"),
    "PCT": ("Prepare custom tools", 0.6, "resource-development", None),
    "RRE": ("Register rogue email addresses", 0.8, "resource-development", "T1585.002"),
    "RSD": ("Register spoofed domains", 0.7, "resource-development", "T1583.001"),
    "CoD": ("Compromise domains", 0.4, "resource-development", "T1584.001"),
    "CoS": ("Compromise servers", 0.4, "resource-development", "T1584.004"),
    "HoM": ("Host malware", 0.6, "resource-development", "T1608.001"),
    "HoT": ("Host tools", 0.6, "resource-development", "T1608.002"),
    "SoM": ("Build social media personas", 0.7, "resource-development", "T1585.001"),
    "SiC": ("Obtain signing certificates", 0.4, "resource-development", "T1588.003"),
    "SMU": ("Sign malware and utilities", 0.5, "resource-development", "T1553.002"),
    "SpA": ("Spearphish attachment", 0.5, "initial-access", "T1566.001"),
    "SpL": ("Spearphish link", 0.5, "initial-access", "T1566.002"),
    "SpS": ("Spearphish via service", 0.4, "initial-access", "T1566.003"),
    "WCS": ("Windows command shell", 0.7, "execution", "T1059.003"),
    "WMI": ("WMI execution", 0.5, "execution", "T1047"),
    "VBS": ("Visual Basic payloads", 0.5, "execution", "T1059.005"),
    "UPo": ("Use PowerShell", 0.6, "execution", "T1059.001"),
    "API": ("Native API calls", 0.6, "execution", "T1106"),
    "ExT": ("Execute via scheduled task", 0.5, "execution", "T1053.005"),
    "EMF": ("User opens malicious file", 0.5, "execution", "T1204.002"),
    "EML": ("User follows malicious link", 0.5, "execution", "T1204.001"),
    "PvS": ("Persist via services", 0.5, "persistence", "T1543.003"),
    "PvT": ("Persist via scheduled tasks", 0.5, "persistence", "T1053.005"),
    "IIS": ("Plant IIS components", 0.3, "persistence", "T1505.004"),
    "FnD": ("Files and directories", 0.7, "discovery", "T1083"),
    "GDA": ("Get domain accounts", 0.5, "discovery", "T1087.002"),
    "DDB": ("Detect debuggers", 0.5, "discovery", "T1622"),
    "DLa": ("Detect language settings", 0.6, "discovery", "T1614.001"),
    "DSa": ("Detect sandboxes", 0.5, "discovery", "T1497.001"),
    "ISp": ("Internal spearphishing", 0.4, "lateral-movement", "T1534"),
    "SFO": ("Subvert file open handlers", 0.4, "privilege-escalation", "T1546"),
    "EsT": ("Escalate via scheduled tasks", 0.5, "privilege-escalation", "T1053.005"),
    "Bru": ("Brute force attacks", 0.4, "credential-access", "T1110"),
    "DbE": ("Debugger evasion", 0.5, "defense-evasion", "T1622"),
    "Imp": ("Impersonation", 0.5, "defense-evasion", "T1656"),
    "FDel": ("File deletion", 0.6, "defense-evasion", "T1070.004"),
    "FTM": ("File type masquerade", 0.5, "defense-evasion", "T1036.008"),
    "SwP": ("Software packing", 0.5, "defense-evasion", "T1027.002"),
    "CdS": ("Code signing", 0.4, "defense-evasion", "T1553.002"),
    "Reg32": ("Proxy execution via regsvr32", 0.5, "defense-evasion", "T1218.010"),
    "XSL": ("XSL script processing", 0.4, "defense-evasion", "T1220"),
    "RunD": ("Proxy execution via rundll32", 0.5, "defense-evasion", "T1218.011"),
    "TInj": ("Template injection", 0.4, "defense-evasion", "T1221"),
    "EvSb": ("Evade sandboxes", 0.5, "defense-evasion", "T1497"),
    "TbE": ("Time-based evasion", 0.5, "defense-evasion", "T1497.003"),
    "ArU": ("Archive with utilities", 0.7, "collection", "T1560.001"),
    "DLS": ("Data from local system", 0.7, "collection", "T1005"),
    "WebP": ("Web protocol channel", 0.6, "command-and-control", "T1071.001"),
    "SymC": ("Symmetric crypto channel", 0.5, "command-and-control", "T1573.001"),
    "MMI": ("Multi-stage infrastructure", 0.5, "command-and-control", "T1104"),
    "ExC2": ("Exfiltrate over C2 channel", 0.7, "exfiltration", "T1041"),
    "ExCl": ("Exfiltrate to cloud storage", 0.5, "exfiltration", "T1567.002"),
}


def main() -> None:
    wocao = build(WOCAO_GATES, "SCE", WOCAO_LEAVES)
    wocao.top_extras["name"] = "Operation Wocao (hand-modelled)"
    write_at(wocao, "fixtures/wocao-custom.at.json")
    dream = build(DREAMJOB_GATES, "SCE", DREAMJOB_LEAVES)
    dream.top_extras["name"] = "Operation Dream Job (hand-modelled)"
    write_at(dream, "fixtures/dreamjob-custom.at.json")
    print("wrote fixtures/wocao-custom.at.json and fixtures/dreamjob-custom.at.json")


if __name__ == "__main__":
    main()
